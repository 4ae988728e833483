from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

# Ensure the repo root is importable even when running a script from /tools.
_REPO_ROOT = Path(__file__).resolve().parents[1]
if str(_REPO_ROOT) not in sys.path:
    sys.path.insert(0, str(_REPO_ROOT))

from marginal_metrics.services.io import InputFileError, load_measure, measure_payload
from marginal_metrics.services.measure import marginals


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description="Validate (and optionally normalize) a measure file (JSON or CSV).")
    ap.add_argument("path", help="Path to a measure file.")
    ap.add_argument(
        "--normalize",
        action="store_true",
        help="Emit the canonical JSON form: duplicates merged, atoms sorted, weights renormalized.",
    )
    ap.add_argument(
        "--output",
        help="Write normalized JSON to this path (requires --normalize). If omitted, prints it to stdout.",
    )
    args = ap.parse_args(argv)

    path = Path(args.path).expanduser().resolve()
    try:
        measure = load_measure(path)
    except InputFileError as e:
        raise SystemExit(f"INVALID: {e}")

    sizes = ", ".join(str(m.size) for m in marginals(measure))
    print(f"OK: {measure.size} atoms in dimension {measure.dim} (marginal support sizes: {sizes}) from {path}")

    if args.normalize:
        text = json.dumps(measure_payload(measure), indent=2)
        if args.output:
            out_path = Path(args.output).expanduser().resolve()
            out_path.write_text(text + "\n", encoding="utf-8")
            print(f"Wrote normalized measure to: {out_path}")
        else:
            print(text)
    elif args.output:
        raise SystemExit("--output requires --normalize")

    return 0


if __name__ == "__main__":
    raise SystemExit(main())
