#!/usr/bin/env python3
"""Write the bundled search blueprints to disk, one JSON file per strategy."""

import argparse
from pathlib import Path

from harness_evo.canon import canonical_json
from harness_evo.simkit import bundled_blueprint

KINDS = ("hill_climb", "random", "exhaustive")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="blueprints", help="output directory")
    parser.add_argument("--space", default="restricted", help="harness space name")
    args = parser.parse_args(argv)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for kind in KINDS:
        bp = bundled_blueprint(kind, args.space)
        (out / f"{kind}.json").write_text(canonical_json(bp.to_doc()) + "\n", encoding="utf-8")
        print(f"{kind}: K={bp.loop.K}, tools={','.join(bp.initial_harness.tools)}")
    print(f"wrote {len(KINDS)} blueprints under {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
