#!/usr/bin/env python3
"""Builds data/adult.csv and data/compas.csv from the public raw files.

Sources, either of:
  --raw DIR    directory holding adult.data, adult.test and
               compas-scores-two-years.csv (UCI / ProPublica downloads)
  --wheel WHL  the `responsibly` wheel, which bundles the same files
"""

import argparse
import csv
import io
import pathlib
import sys
import zipfile

ADULT_COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education-num", "marital-status",
    "occupation", "relationship", "race", "sex", "capital-gain", "capital-loss",
    "hours-per-week", "native-country", "income",
]

COMPAS_NAME = "compas-scores-two-years.csv"


def read_sources(args):
    names = ["adult.data", "adult.test", COMPAS_NAME]
    if args.raw:
        root = pathlib.Path(args.raw)
        return {n: (root / n).read_text(encoding="utf-8", errors="replace") for n in names}
    with zipfile.ZipFile(args.wheel) as z:
        members = {pathlib.PurePosixPath(m).name: m for m in z.namelist()}
        return {n: z.read(members[n]).decode("utf-8", errors="replace") for n in names}


def adult_rows(text):
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("|"):
            continue
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != len(ADULT_COLUMNS):
            continue
        fields[-1] = fields[-1].rstrip(".")
        yield fields


def write_adult(sources, out):
    n = 0
    with open(out, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(ADULT_COLUMNS)
        for name in ("adult.data", "adult.test"):
            for row in adult_rows(sources[name]):
                w.writerow(row)
                n += 1
    return n


def write_compas(sources, out):
    rows = list(csv.reader(io.StringIO(sources[COMPAS_NAME])))
    with open(out, "w", newline="") as f:
        csv.writer(f, lineterminator="\n").writerows(rows)
    return len(rows) - 1


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--raw")
    src.add_argument("--wheel")
    p.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data"))
    args = p.parse_args()

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sources = read_sources(args)
    print(f"adult.csv: {write_adult(sources, out / 'adult.csv')} rows")
    print(f"compas.csv: {write_compas(sources, out / 'compas.csv')} rows")
    return 0


if __name__ == "__main__":
    sys.exit(main())
