#!/usr/bin/env python3
"""Rebuild data/{heart,australian,diabetes}.libsvm from the KEEL copies of the
Statlog heart, Statlog australian and Pima diabetes tables.

The files are vendored in data/; this script documents how they were produced
and can regenerate them. Label tokens follow the LIBSVM dataset page
conventions (+1/-1).

KEEL's australian.dat dropped the decimal point in A2, A3 and A7. A2 is
restored from its known range [13.75, 80.25]; A3 and A7 keep the KEEL digits.
"""
import argparse
import io
import pathlib
import urllib.request
import zipfile

WHEEL = ("https://files.pythonhosted.org/packages/77/88/"
         "c99136c61bb85663bd8cfb328fada55846eb10bd7271058160526e9674bf/"
         "keel_ds-0.2.5-py3-none-any.whl")
RAW = "keel_ds/data/balanced/raw/{}.dat"


def rows(archive, name):
    text = archive.read(RAW.format(name)).decode()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("@"):
            yield line.split(",")


def fmt(value):
    value = float(value)
    return repr(int(value)) if value.is_integer() else repr(value)


def emit(label, values):
    pairs = [f"{i}:{fmt(v)}" for i, v in enumerate(values, 1) if float(v) != 0.0]
    return " ".join([label] + pairs)


def restore_a2(value):
    v = float(value)
    for scale in (1.0, 10.0, 100.0):
        if 13.75 <= v / scale <= 80.25:
            return v / scale
    raise ValueError(f"A2 value out of range: {value}")


def heart(archive):
    out = []
    for r in rows(archive, "heart"):
        values = [float(x) for x in r[:-1]]
        values[9] /= 10.0  # oldpeak is stored x10 in KEEL
        out.append(emit("+1" if r[-1] == "2" else "-1", values))
    return out


def australian(archive):
    out = []
    for r in rows(archive, "australian"):
        values = [float(x) for x in r[:-1]]
        values[1] = restore_a2(values[1])
        out.append(emit("+1" if r[-1] == "1" else "-1", values))
    return out


def diabetes(archive):
    out = []
    for r in rows(archive, "pima"):
        label = "-1" if r[-1].strip() == "tested_positive" else "+1"
        out.append(emit(label, r[:-1]))
    return out


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--wheel", help="local keel_ds wheel instead of downloading")
    parser.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data"))
    args = parser.parse_args()
    if args.wheel:
        blob = pathlib.Path(args.wheel).read_bytes()
    else:
        with urllib.request.urlopen(WHEEL, timeout=120) as resp:
            blob = resp.read()
    archive = zipfile.ZipFile(io.BytesIO(blob))
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, build in (("heart", heart), ("australian", australian), ("diabetes", diabetes)):
        lines = build(archive)
        (out / f"{name}.libsvm").write_text("\n".join(lines) + "\n")
        print(f"{name}: {len(lines)} rows")


if __name__ == "__main__":
    main()
