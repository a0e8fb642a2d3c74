"""Command line interface.

Every subcommand builds a request, sends it to the HTTP API and prints
the response. By default the app runs in process; ``--server`` points
the same subcommands at a remote instance, and ``ecert serve`` starts
one.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from typing import Optional

from .harness.bench import bench_rows_to_csv

__all__ = ["main"]


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _strs(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--server", help="base URL of a running service; default runs in process")
    sp.add_argument("--out", help="write the result to this file instead of stdout")
    sp.add_argument("--format", choices=["json", "csv"], default="json")


def _add_model(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--blackbox", choices=["pwl"], default="pwl", help="built-in model")
    sp.add_argument(
        "--blackbox-cmd",
        help="run this command as the model process (newline-delimited JSON protocol)",
    )
    sp.add_argument("--dim", type=int, required=True, help="input dimension")
    sp.add_argument("--slope", type=float, default=0.75, help="built-in model slope")


def _add_strategy(sp: argparse.ArgumentParser) -> None:
    sp.add_argument(
        "--strategy", choices=["unif", "unifi", "adapti", "unifi-iid"], default="unif"
    )
    sp.add_argument("--budget", type=int, default=1000, help="query budget per region")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--sigma", type=float, default=1.0, help="probe width fallback")
    sp.add_argument("--workers", type=int, default=1, help="evaluation threads")


def _add_driver(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--theta", type=float, default=0.75, help="fidelity threshold")
    sp.add_argument("--regions", type=int, default=10, help="maximum shells to try")
    sp.add_argument("--lb", type=float, default=0.0, help="initial inner half-width")
    sp.add_argument("--ub", type=float, default=1.0, help="initial outer half-width")
    sp.add_argument("--b-policy", choices=["min", "max", "mean"], default="min")
    sp.add_argument("--exit-gap", type=float, default=0.1, help="stop once ub-lb < this/dim")


def _add_anchor(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--x0", type=_floats, help="anchor point, comma-separated; default origin")
    sp.add_argument(
        "--explanation",
        type=_floats,
        help="linear explanation weights, comma-separated; default built-in slope",
    )
    sp.add_argument("--intercept", type=float, default=0.0)
    sp.add_argument("--repeat", type=int, default=1, help="runs with consecutive seeds")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ecert",
        description="Certify how far a local explanation can be trusted around a point.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("certify", help="find the largest certified half-width")
    _add_model(sp)
    _add_anchor(sp)
    _add_strategy(sp)
    _add_driver(sp)
    _add_common(sp)

    sp = sub.add_parser("bounds", help="certify and attach confidence estimates")
    _add_model(sp)
    _add_anchor(sp)
    _add_strategy(sp)
    _add_driver(sp)
    sp.add_argument("--epsilon", type=float, default=0.01, help="fidelity margin")
    sp.add_argument("--proxy", choices=["theta", "fhat"], default="theta")
    sp.add_argument("--kappa", type=float, help="tail exponent; default dim/2")
    sp.add_argument("--evt", action="store_true", help="also compute the extreme-value bound")
    _add_common(sp)

    sp = sub.add_parser("bench", help="width/time grid over dims, budgets, strategies")
    sp.add_argument("--dims", type=_ints, required=True, help="comma-separated dimensions")
    sp.add_argument("--budgets", type=_ints, required=True, help="comma-separated budgets")
    sp.add_argument(
        "--strategies", type=_strs, required=True, help="comma-separated strategy names"
    )
    sp.add_argument("--seeds", type=_ints, default=list(range(10)))
    sp.add_argument("--theta", type=float, default=0.75)
    sp.add_argument("--slope", type=float, default=0.75)
    sp.add_argument("--regions", type=int, default=10)
    sp.add_argument("--b-policy", choices=["min", "max", "mean"], default="min")
    sp.add_argument("--workers", type=int, default=1)
    _add_common(sp)

    sp = sub.add_parser("coverage", help="explain a dataset with few certifications")
    _add_model(sp)
    sp.add_argument("--data", help="JSON file with an array of samples")
    sp.add_argument("--clusters", type=int, default=5, help="generated clusters")
    sp.add_argument("--per-cluster", type=int, default=8)
    sp.add_argument("--spread", type=float, default=0.01)
    sp.add_argument("--center-scale", type=float, default=0.1)
    sp.add_argument("--cluster-seed", type=int, default=0)
    sp.add_argument("--explanation", type=_floats)
    sp.add_argument("--intercept", type=float, default=0.0)
    _add_strategy(sp)
    sp.add_argument("--theta", type=float, default=0.75)
    sp.add_argument("--regions", type=int, default=10)
    sp.add_argument("--b-policy", choices=["min", "max", "mean"], default="min")
    sp.add_argument("--top-fraction", type=float, default=0.6)
    sp.add_argument("--expl-cost", type=float, default=5000.0)
    _add_common(sp)

    sp = sub.add_parser("stability", help="agreement statistics over explanation pairs")
    sp.add_argument(
        "--pairs", required=True, help="JSON file of [first, second] weight pairs, - for stdin"
    )
    sp.add_argument("--k", type=int, required=True, help="top coordinates to compare")
    _add_common(sp)

    sp = sub.add_parser("serve", help="run the HTTP service")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8000)

    return p


def _client(args):
    if args.server:
        import httpx

        return httpx.Client(base_url=args.server, timeout=None)
    from fastapi.testclient import TestClient

    from .service import create_app

    return TestClient(create_app())


def _model_payload(args) -> dict:
    return {
        "dim": args.dim,
        "builtin": args.blackbox,
        "slope": args.slope,
        "command": args.blackbox_cmd,
    }


def _certify_payload(args) -> dict:
    expl = None
    if args.explanation is not None:
        expl = {"alpha": args.explanation, "intercept": args.intercept}
    return {
        "blackbox": _model_payload(args),
        "x0": args.x0,
        "explanation": expl,
        "strategy": {
            "kind": args.strategy,
            "budget": args.budget,
            "sigma": args.sigma,
            "rng_seed": args.seed,
            "workers": args.workers,
        },
        "driver": {
            "theta": args.theta,
            "max_regions": args.regions,
            "initial_lb": args.lb,
            "initial_ub": args.ub,
            "b_policy": args.b_policy,
            "exit_gap_factor": args.exit_gap,
        },
        "repeat": args.repeat,
    }


def _emit(args, data: dict, csv_rows: Optional[list] = None) -> int:
    if args.format == "csv":
        if csv_rows is None:
            print("csv output is only available for bench", file=sys.stderr)
            return 2
        buf = io.StringIO()
        bench_rows_to_csv(csv_rows, buf)
        text = buf.getvalue()
    else:
        text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as fp:
            fp.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _post(args, path: str, payload: dict):
    with _client(args) as client:
        resp = client.post(path, json=payload)
        if resp.status_code >= 400:
            try:
                detail = resp.json().get("detail", resp.text)
            except ValueError:
                detail = resp.text
            print(f"error {resp.status_code}: {detail}", file=sys.stderr)
            return None
        return resp.json()


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .service import create_app

        uvicorn.run(create_app(), host=args.host, port=args.port)
        return 0

    if args.command == "certify":
        doc = _post(args, "/v1/certify", _certify_payload(args))
        return 1 if doc is None else _emit(args, doc)

    if args.command == "bounds":
        payload = _certify_payload(args)
        payload.update(
            {"epsilon": args.epsilon, "proxy": args.proxy, "kappa": args.kappa, "evt": args.evt}
        )
        doc = _post(args, "/v1/bounds", payload)
        return 1 if doc is None else _emit(args, doc)

    if args.command == "bench":
        payload = {
            "dims": args.dims,
            "budgets": args.budgets,
            "strategies": args.strategies,
            "seeds": args.seeds,
            "theta": args.theta,
            "slope": args.slope,
            "max_regions": args.regions,
            "b_policy": args.b_policy,
            "workers": args.workers,
        }
        doc = _post(args, "/v1/bench", payload)
        return 1 if doc is None else _emit(args, doc, csv_rows=doc["rows"])

    if args.command == "coverage":
        samples = None
        clusters = None
        if args.data:
            with open(args.data) as fp:
                samples = json.load(fp)
        else:
            clusters = {
                "clusters": args.clusters,
                "per_cluster": args.per_cluster,
                "dim": args.dim,
                "spread": args.spread,
                "center_scale": args.center_scale,
                "seed": args.cluster_seed,
            }
        expl = None
        if args.explanation is not None:
            expl = {"alpha": args.explanation, "intercept": args.intercept}
        payload = {
            "blackbox": _model_payload(args),
            "samples": samples,
            "clusters": clusters,
            "explanation": expl,
            "strategy": {
                "kind": args.strategy,
                "budget": args.budget,
                "sigma": args.sigma,
                "rng_seed": args.seed,
                "workers": args.workers,
            },
            "theta": args.theta,
            "max_regions": args.regions,
            "b_policy": args.b_policy,
            "top_fraction": args.top_fraction,
            "expl_cost": args.expl_cost,
        }
        doc = _post(args, "/v1/coverage", payload)
        return 1 if doc is None else _emit(args, doc)

    if args.command == "stability":
        if args.pairs == "-":
            pairs = json.load(sys.stdin)
        else:
            with open(args.pairs) as fp:
                pairs = json.load(fp)
        doc = _post(args, "/v1/stability", {"pairs": pairs, "k": args.k})
        return 1 if doc is None else _emit(args, doc)

    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
