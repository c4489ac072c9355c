"""Regenerate the shipped quotient catalogs from the enumeration oracle.

Usage: python scripts/generate_catalogs.py [output_dir]
"""

import sys
from pathlib import Path

from moduli_tiler.catalog_oracle import CATALOG_SURFACES, catalog_name, catalog_to_json, generate_catalog

DEFAULT_DIR = Path(__file__).resolve().parents[1] / "src" / "moduli_tiler" / "data" / "catalogs"


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    out = Path(argv[0]) if argv else DEFAULT_DIR
    out.mkdir(parents=True, exist_ok=True)
    for g, p in CATALOG_SURFACES:
        path = out / f"{catalog_name(g, p)}.json"
        path.write_text(catalog_to_json(generate_catalog(g, p)), encoding="utf-8")
        print(path)


if __name__ == "__main__":
    main()
