"""Reference model process for the line protocol.

Serves the built-in piecewise-linear model over stdin/stdout:
one JSON object per line in, ``{"id": ..., "xs": [[...], ...]}``, one
``{"id": ..., "ys": [...]}`` per line out, flushed immediately.

Run as ``python3 -m ecert.harness.pwl_child --dim D``.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

import numpy as np

from ..special import pwl_response


def main(argv: Optional[list[str]] = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dim", type=int, required=True)
    args = ap.parse_args(argv)
    for line in sys.stdin:
        if not line.strip():
            continue
        req = json.loads(line)
        xs = np.asarray(req["xs"], dtype=float)
        if xs.ndim != 2 or xs.shape[1] != args.dim:
            raise SystemExit(f"expected rows of length {args.dim}")
        ys = np.atleast_1d(pwl_response(xs))
        sys.stdout.write(json.dumps({"id": req["id"], "ys": [float(y) for y in ys]}) + "\n")
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
