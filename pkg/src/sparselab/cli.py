"""Command-line entry point.

A run is described by a JSON config file, by flags, or by flags
overriding a file.  The work happens either in-process or, with
--server, on a running service instance; in both cases the files
written locally are byte-identical, because the service returns the
exact strings the local path would have produced.

Exit codes: 0 success, 2 invalid configuration, 3 enumeration or
solver budget exceeded, 4 internal inconsistency, 1 anything else.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import EXPERIMENT_NAMES, parse_config
from .errors import ConfigError, SparselabError, exit_code_for
from .runner import resolve_out_dir, run_experiment, write_outputs

__all__ = ["build_parser", "main"]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="sparselab",
        description="singular value, restricted isometry and sparse recovery experiments",
    )
    p.add_argument("--config", metavar="PATH", help="JSON config file; flags override its fields")
    p.add_argument("--experiment", choices=EXPERIMENT_NAMES, help="experiment to run")
    p.add_argument("--N", type=int, help="primary dimension (columns for tall matrices)")
    p.add_argument("--n", type=int, help="secondary dimension (rows of the measurement matrix)")
    p.add_argument("--s", type=int, help="sparsity level")
    p.add_argument("--eps", type=float, help="net radius for net-bounds")
    p.add_argument("--delta", type=float, help="target isometry constant for ric-prop1")
    p.add_argument("--trials", type=int, help="Monte Carlo trials")
    p.add_argument("--seed", type=int, help="stream seed")
    p.add_argument("--out", metavar="DIR", help="output directory (default: $SPARSELAB_OUT or .)")
    p.add_argument("--workers", type=int, help="worker threads; never changes results")
    p.add_argument("--format", choices=("csv", "json", "both"), help="raw samples format")
    p.add_argument("--server", metavar="URL", help="run on a sparselab service instead of locally")
    return p


_OVERRIDE_KEYS = (
    "experiment",
    "N",
    "n",
    "s",
    "eps",
    "delta",
    "trials",
    "seed",
    "out",
    "workers",
    "format",
)


def _merged_config(args: argparse.Namespace) -> dict:
    data: dict = {}
    if args.config:
        path = Path(args.config)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
    for key in _OVERRIDE_KEYS:
        value = getattr(args, key)
        if value is not None:
            data[key] = value
    if "experiment" not in data:
        raise ConfigError("no experiment given; use --experiment or a config file")
    return data


def _print_error(exc: BaseException) -> None:
    record = {
        "error": {
            "type": type(exc).__name__,
            "message": str(exc),
            "exit_code": exit_code_for(exc),
        }
    }
    print(json.dumps(record), file=sys.stderr)


def _run_remote(server: str, cfg) -> tuple[list[Path], str]:
    import httpx

    url = server.rstrip("/") + "/api/run"
    resp = httpx.post(url, json=cfg.model_dump(mode="json"), timeout=600.0)
    if resp.status_code != 200:
        try:
            err = resp.json()["error"]
        except Exception:
            raise SparselabError(f"server returned {resp.status_code}: {resp.text[:200]}")
        exc = SparselabError(f"server: {err.get('message', 'unknown error')}")
        exc.exit_code = int(err.get("exit_code", 1))
        raise exc
    payload = resp.json()

    base = resolve_out_dir(cfg)
    base.mkdir(parents=True, exist_ok=True)
    name = cfg.experiment
    written: list[Path] = []

    def emit(fname: str, content: str) -> None:
        p = base / fname
        p.write_text(content)
        written.append(p)

    if cfg.format in ("csv", "both"):
        emit(f"{name}_samples.csv", payload["samples_csv"])
    if cfg.format in ("json", "both"):
        records = payload["records"]
        emit(f"{name}_samples.json", json.dumps(records, indent=2) + "\n")
    emit(
        f"{name}_summary.json",
        json.dumps(
            {
                "experiment": payload["experiment"],
                "config": payload["config"],
                "summary": payload["summary"],
            },
            indent=2,
            sort_keys=True,
        )
        + "\n",
    )
    emit(f"{name}_summary.txt", payload["text"] + "\n")
    for fname in sorted(payload["extra_files"]):
        emit(fname, payload["extra_files"][fname])
    return written, payload["text"]


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = parse_config(_merged_config(args))
        if args.server:
            written, text = _run_remote(args.server, cfg)
        else:
            result = run_experiment(cfg)
            written = write_outputs(result)
            text = result.text
        print(text)
        for path in written:
            print(f"wrote {path}")
        return 0
    except SparselabError as exc:
        _print_error(exc)
        return exit_code_for(exc)
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports, not crashes
        _print_error(exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
