#!/usr/bin/env python3
"""Download the NSL-KDD train/test files and verify their integrity.

The dataset is not bundled with this repository. This script pulls
KDDTrain+.txt and KDDTest+.txt from a public mirror, then checks:

  * line counts match the published sizes (125973 train / 22544 test),
  * every line has the 43-field record layout,
  * the SHA-256 digest matches a pin, when one is supplied.

The computed digests are always printed so a first successful download
can be pinned for later runs (--sha256-train / --sha256-test).

Usage:
    python scripts/fetch_nsl_kdd.py [--dest data] [--mirror URL_BASE]
        [--sha256-train HEX] [--sha256-test HEX]
"""

import argparse
import hashlib
import sys
import urllib.request
from pathlib import Path

MIRRORS = [
    "https://raw.githubusercontent.com/defcom17/NSL_KDD/master",
    "https://raw.githubusercontent.com/jmnwong/NSL-KDD-Dataset/master",
]

EXPECTED_LINES = {"KDDTrain+.txt": 125973, "KDDTest+.txt": 22544}


def sha256_of(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def validate_structure(path: Path, expected_lines: int) -> None:
    n = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            n += 1
            fields = line.rstrip("\n").split(",")
            if len(fields) != 43:
                raise SystemExit(
                    f"{path.name}:{lineno}: expected 43 fields, got {len(fields)}"
                )
    if n != expected_lines:
        raise SystemExit(f"{path.name}: expected {expected_lines} records, got {n}")


def fetch(name: str, dest: Path, mirrors: list[str]) -> Path:
    target = dest / name
    if target.exists():
        print(f"{name}: already present, skipping download")
        return target
    quoted = name.replace("+", "%2B")
    last_error = None
    for base in mirrors:
        url = f"{base}/{quoted}"
        try:
            print(f"fetching {url}")
            with urllib.request.urlopen(url, timeout=60) as resp:
                target.write_bytes(resp.read())
            return target
        except OSError as exc:
            last_error = exc
            print(f"  failed: {exc}", file=sys.stderr)
    raise SystemExit(f"could not download {name}: {last_error}")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dest", default="data", help="target directory (default: data)")
    parser.add_argument("--mirror", action="append", default=None,
                        help="mirror base URL (repeatable; tried in order)")
    parser.add_argument("--sha256-train", help="expected digest for KDDTrain+.txt")
    parser.add_argument("--sha256-test", help="expected digest for KDDTest+.txt")
    args = parser.parse_args()

    dest = Path(args.dest)
    dest.mkdir(parents=True, exist_ok=True)
    pins = {"KDDTrain+.txt": args.sha256_train, "KDDTest+.txt": args.sha256_test}
    for name, expected_lines in EXPECTED_LINES.items():
        path = fetch(name, dest, args.mirror or MIRRORS)
        validate_structure(path, expected_lines)
        digest = sha256_of(path)
        print(f"{name}: {expected_lines} records OK, sha256={digest}")
        if pins[name] and pins[name].lower() != digest:
            raise SystemExit(f"{name}: sha256 mismatch (expected {pins[name]})")
    print(f"done; point the tools at --train {dest}/KDDTrain+.txt --test {dest}/KDDTest+.txt")
    return 0


if __name__ == "__main__":
    sys.exit(main())
