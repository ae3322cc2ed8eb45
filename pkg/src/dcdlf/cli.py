"""Command-line client for the decomposition service.

The CLI owns all file I/O (CSV matrices in, artifact trees out) and
delegates every computation to the HTTP service: to a remote instance when
--server is given, otherwise to an in-process copy of the app over the ASGI
interface, so no daemon is needed for batch use.

Exit codes: 0 success, 2 configuration error, 3 input error, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import asyncio
import sys
from dataclasses import dataclass
from pathlib import Path

import httpx

from ._version import __version__
from .core import ConfigError, DcdlfError, InputError, NumericalError
from .matrix_io import (
    file_digest,
    load_manifest,
    load_matrix_csv,
    save_manifest,
    save_matrix_csv,
    save_table_csv,
)
from .plots import write_pve_summary

EXIT_CODES = {"config": 2, "input": 3, "numerical": 4}
_ERRORS = {"config": ConfigError, "input": InputError, "numerical": NumericalError}


class ServiceClient:
    """Thin JSON client; in-process ASGI by default, HTTP when server is set."""

    def __init__(self, server: str | None = None):
        self.server = server

    def post(self, path: str, payload: dict) -> dict:
        if self.server is not None:
            with httpx.Client(base_url=self.server, timeout=600.0) as client:
                response = client.post(path, json=payload)
        else:
            response = asyncio.run(self._post_inprocess(path, payload))
        return self._handle(response)

    @staticmethod
    async def _post_inprocess(path: str, payload: dict) -> httpx.Response:
        from .api import app

        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(
            transport=transport, base_url="http://dcdlf.local", timeout=600.0
        ) as client:
            return await client.post(path, json=payload)

    @staticmethod
    def _handle(response: httpx.Response) -> dict:
        if response.status_code == 200:
            return response.json()
        try:
            body = response.json()
        except ValueError:
            body = {}
        if response.status_code == 422:
            raise ConfigError(f"invalid request: {body.get('detail', response.text)}")
        code = body.get("error_code", "numerical")
        message = body.get("message", response.text)
        raise _ERRORS.get(code, NumericalError)(message)


@dataclass
class RunConfig:
    """Resolved configuration of a decompose run."""

    view1_path: str
    view2_path: str
    out_dir: str
    r1: int | None = None
    r2: int | None = None
    rc: int | None = None
    rank_rule: str = "explicit"
    rc_rule: str = "explicit"
    rho_cutoff: float = 0.05
    aux_mode: str = "projected"
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.rho_cutoff < 1.0:
            raise ConfigError(f"rho_cutoff must lie in (0, 1), got {self.rho_cutoff}")
        if self.rank_rule == "explicit" and (self.r1 is None or self.r2 is None):
            raise ConfigError("rank_rule 'explicit' requires --r1 and --r2")
        if self.rc_rule == "explicit" and self.rc is None:
            raise ConfigError("rc_rule 'explicit' requires --rc")


_CONFIG_INT_KEYS = ("r1", "r2", "rc", "seed")
_CONFIG_FLOAT_KEYS = ("rho_cutoff",)
_CONFIG_KEYS = (
    "view1_path", "view2_path", "out_dir", "rank_rule", "rc_rule",
    "aux_mode",
) + _CONFIG_INT_KEYS + _CONFIG_FLOAT_KEYS


def _load_run_config(args) -> RunConfig:
    values: dict = {}
    if args.config:
        entries = load_manifest(args.config)
        unknown = set(entries) - set(_CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key, raw in entries.items():
            try:
                if key in _CONFIG_INT_KEYS:
                    values[key] = int(raw)
                elif key in _CONFIG_FLOAT_KEYS:
                    values[key] = float(raw)
                else:
                    values[key] = raw
            except ValueError:
                raise ConfigError(f"config key {key}: cannot parse {raw!r}")
    overrides = {
        "view1_path": args.view1, "view2_path": args.view2,
        "out_dir": args.out, "r1": args.r1, "r2": args.r2, "rc": args.rc,
        "rank_rule": args.rank_rule, "rc_rule": args.rc_rule,
        "rho_cutoff": args.rho_cutoff, "aux_mode": args.aux_mode,
        "seed": args.seed,
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    for required in ("view1_path", "view2_path", "out_dir"):
        if required not in values:
            raise ConfigError(f"missing required option: {required}")
    return RunConfig(**values)


def _names_or_indices(names, p: int) -> list[str]:
    return list(names) if names else [str(i + 1) for i in range(p)]


def cmd_decompose(args) -> int:
    config = _load_run_config(args)
    view1 = load_matrix_csv(config.view1_path)
    view2 = load_matrix_csv(config.view2_path)
    client = ServiceClient(args.server)
    payload = {
        "view1": view1.values.tolist(),
        "view2": view2.values.tolist(),
        "r1": config.r1, "r2": config.r2, "rc": config.rc,
        "rank_rule": config.rank_rule, "rc_rule": config.rc_rule,
        "rho_cutoff": config.rho_cutoff, "aux_mode": config.aux_mode,
        "seed": config.seed,
    }
    result = client.post("/v1/decompose", payload)

    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in ("xhat_1", "xhat_2", "chat_1", "chat_2", "dhat_1", "dhat_2"):
        key = name.replace("_", "")  # xhat_1 -> xhat1
        save_matrix_csv(out / f"{name}.csv", result[key])
    save_matrix_csv(out / "c_factors.csv", result["c_factors"])
    save_matrix_csv(out / "d_factors_1.csv", result["d_factors_1"])
    save_matrix_csv(out / "d_factors_2.csv", result["d_factors_2"])
    for key, name in (("cov_c1", "cov_c_1"), ("cov_c2", "cov_c_2"),
                      ("cov_d1", "cov_d_1"), ("cov_d2", "cov_d_2")):
        save_matrix_csv(out / f"{name}.csv", result[key])

    save_table_csv(out / "canonical_correlations.csv", ["index", "rho"],
                   [(i + 1, float(r)) for i, r in enumerate(result["rho"])])
    for k, view in ((1, view1), (2, view2)):
        pve = result[f"pve{k}"]
        labels = _names_or_indices(view.names, view.p)
        save_table_csv(
            out / f"pve_variables_{k}.csv", ["variable", "pve_c", "pve_d"],
            [(labels[i], float(c), float(d)) for i, (c, d) in
             enumerate(zip(pve["variable_pve_c"], pve["variable_pve_d"]))],
        )
    save_table_csv(
        out / "pve_views.csv", ["view", "pve_c", "pve_d"],
        [(k, float(result[f"pve{k}"]["view_pve_c"]),
          float(result[f"pve{k}"]["view_pve_d"])) for k in (1, 2)],
    )
    write_pve_summary(
        out / "pve_summary.svg",
        (result["pve1"]["view_pve_c"], result["pve2"]["view_pve_c"]),
        (result["pve1"]["view_pve_d"], result["pve2"]["view_pve_d"]),
        result["rho"],
    )

    manifest = {
        "tool": "dcdlf decompose",
        "version": result["version"],
        "seed": result["seed"],
        "aux_mode": result["aux_mode"],
        "rank_rule": config.rank_rule,
        "rc_rule": config.rc_rule,
        "rho_cutoff": "%.17g" % config.rho_cutoff,
        "r1": result["ranks"]["r1"],
        "r2": result["ranks"]["r2"],
        "rc": result["ranks"]["rc"],
        "effective_r1": result["effective_ranks"]["r1"],
        "effective_r2": result["effective_ranks"]["r2"],
        "effective_rc": result["effective_ranks"]["rc"],
        "tau1": "%.17g" % result["tau1"],
        "tau2": "%.17g" % result["tau2"],
        "view1_path": config.view1_path,
        "view2_path": config.view2_path,
        "view1_sha256": file_digest(config.view1_path),
        "view2_sha256": file_digest(config.view2_path),
    }
    for key, value in sorted(result["diagnostics"].items()):
        manifest[f"diag_{key}"] = value
    save_manifest(out / "manifest.txt", manifest)
    print(f"wrote decomposition artifacts to {out}")
    return 0


def cmd_simulate(args) -> int:
    try:
        rho = tuple(float(v) for v in args.rho.split(",")) if args.rho else ()
    except ValueError:
        raise ConfigError(f"cannot parse --rho {args.rho!r}")
    client = ServiceClient(args.server)
    payload = {
        "p1": args.p1, "p2": args.p2, "r1": args.r1, "r2": args.r2,
        "rc": args.rc, "rho": list(rho), "loading_scale": args.loading_scale,
        "noise_sd": args.noise_sd, "seed": args.seed, "n": args.n,
    }
    result = client.post("/v1/simulate", payload)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_matrix_csv(out / "y_1.csv", result["y1"])
    save_matrix_csv(out / "y_2.csv", result["y2"])
    truth = result["truth"]
    for key in ("x1", "x2", "c1", "c2", "d1", "d2"):
        save_matrix_csv(out / f"truth_{key[0]}_{key[1]}.csv", truth[key])
    for key in ("cov_c1", "cov_c2", "cov_d1", "cov_d2"):
        save_matrix_csv(out / f"truth_{key[:-1]}_{key[-1]}.csv", truth[key])
    save_table_csv(out / "truth_rho.csv", ["index", "rho"],
                   [(i + 1, float(r)) for i, r in enumerate(truth["rho"])])
    save_manifest(out / "manifest.txt", {
        "tool": "dcdlf simulate",
        "version": result["version"],
        "p1": args.p1, "p2": args.p2, "r1": args.r1, "r2": args.r2,
        "rc": args.rc, "rho": args.rho or "",
        "loading_scale": "%.17g" % args.loading_scale,
        "noise_sd": "%.17g" % args.noise_sd,
        "seed": args.seed, "n": args.n,
    })
    print(f"wrote simulated dataset to {out}")
    return 0


def cmd_oracle(args) -> int:
    sigma1 = load_matrix_csv(args.sigma1)
    sigma2 = load_matrix_csv(args.sigma2)
    sigma12 = load_matrix_csv(args.sigma12)
    client = ServiceClient(args.server)
    payload = {
        "sigma1": sigma1.values.tolist(),
        "sigma2": sigma2.values.tolist(),
        "sigma12": sigma12.values.tolist(),
        "r1": args.r1, "r2": args.r2, "rc": args.rc,
    }
    result = client.post("/v1/oracle", payload)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_table_csv(out / "canonical_correlations.csv", ["index", "rho"],
                   [(i + 1, float(r)) for i, r in enumerate(result["rho"])])
    for key, name in (("b1", "b_1"), ("b2", "b_2"),
                      ("cov_c1", "cov_c_1"), ("cov_c2", "cov_c_2"),
                      ("cov_d1", "cov_d_1"), ("cov_d2", "cov_d_2")):
        save_matrix_csv(out / f"{name}.csv", result[key])
    for k in (1, 2):
        pve = result[f"pve{k}"]
        labels = [str(i + 1) for i in range(len(pve["variable_pve_c"]))]
        save_table_csv(
            out / f"pve_variables_{k}.csv", ["variable", "pve_c", "pve_d"],
            [(labels[i], float(c), float(d)) for i, (c, d) in
             enumerate(zip(pve["variable_pve_c"], pve["variable_pve_d"]))],
        )
    save_table_csv(
        out / "pve_views.csv", ["view", "pve_c", "pve_d"],
        [(k, float(result[f"pve{k}"]["view_pve_c"]),
          float(result[f"pve{k}"]["view_pve_d"])) for k in (1, 2)],
    )
    tri = result["tri_orthogonality"]
    save_manifest(out / "tri_orthogonality.txt", {
        "max_cross_cov": "%.17g" % tri["max_cross_cov"],
        "max_var_c_error": "%.17g" % tri["max_var_c_error"],
        "max_var_d_error": "%.17g" % tri["max_var_d_error"],
        "tolerance": "%.17g" % tri["tolerance"],
        "passed": tri["passed"],
    })
    print(f"wrote population oracle artifacts to {out}")
    if not tri["passed"]:
        raise NumericalError(
            "population tri-orthogonality audit failed; see tri_orthogonality.txt"
        )
    return 0


def _load_pve_column(path: Path) -> tuple[list[float], list[float]]:
    pve_c: list[float] = []
    pve_d: list[float] = []
    for line in path.read_text().splitlines()[1:]:
        if not line.strip():
            continue
        cells = line.split(",")
        pve_c.append(float(cells[1]))
        pve_d.append(float(cells[2]))
    return pve_c, pve_d


def cmd_check(args) -> int:
    out = Path(args.dir)
    if not out.is_dir():
        raise InputError(f"no such directory: {out}")
    manifest = load_manifest(out / "manifest.txt")

    def matrix(name: str) -> list:
        return load_matrix_csv(out / f"{name}.csv").values.tolist()

    def factors(name: str) -> list:
        path = out / f"{name}.csv"
        if path.stat().st_size == 0:
            return []
        return load_matrix_csv(path).values.tolist()

    rho = [float(line.split(",")[1])
           for line in (out / "canonical_correlations.csv")
           .read_text().splitlines()[1:] if line.strip()]
    pve1_c, pve1_d = _load_pve_column(out / "pve_variables_1.csv")
    pve2_c, pve2_d = _load_pve_column(out / "pve_variables_2.csv")

    payload = {
        "xhat1": matrix("xhat_1"), "xhat2": matrix("xhat_2"),
        "chat1": matrix("chat_1"), "chat2": matrix("chat_2"),
        "dhat1": matrix("dhat_1"), "dhat2": matrix("dhat_2"),
        "cov_c1": matrix("cov_c_1"), "cov_c2": matrix("cov_c_2"),
        "cov_d1": matrix("cov_d_1"), "cov_d2": matrix("cov_d_2"),
        "c_factors": factors("c_factors"),
        "d_factors_1": factors("d_factors_1"),
        "d_factors_2": factors("d_factors_2"),
        "rho": rho,
        "pve1_c": pve1_c, "pve1_d": pve1_d,
        "pve2_c": pve2_c, "pve2_d": pve2_d,
        "aux_mode": manifest.get("aux_mode", "projected"),
        "rc": int(manifest["effective_rc"]) if "effective_rc" in manifest else None,
    }
    client = ServiceClient(args.server)
    result = client.post("/v1/check", payload)
    for check in result["checks"]:
        print(f"[{check['status'].upper():>4}] {check['name']}: "
              f"{check['value']:.3e} (tolerance {check['tolerance']:.1e})")
    if not result["passed"]:
        print("invariant checks FAILED")
        return 4
    print("all enforced invariant checks passed")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .api import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dcdlf",
        description="Two-view common/distinctive decomposition toolkit",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    dec = sub.add_parser("decompose", help="decompose two CSV views")
    dec.add_argument("--view1", help="CSV of the first view (p1 x n)")
    dec.add_argument("--view2", help="CSV of the second view (p2 x n)")
    dec.add_argument("--out", help="output directory")
    dec.add_argument("--config", help="key=value config file; flags override")
    dec.add_argument("--r1", type=int)
    dec.add_argument("--r2", type=int)
    dec.add_argument("--rc", type=int)
    dec.add_argument("--rank-rule", choices=["explicit", "eigengap"], default=None)
    dec.add_argument("--rc-rule", choices=["explicit", "rho_cutoff"], default=None)
    dec.add_argument("--rho-cutoff", type=float, default=None)
    dec.add_argument("--aux-mode", choices=["raw", "projected"], default=None)
    dec.add_argument("--seed", type=int, default=None)
    dec.add_argument("--server", help="service URL (default: in-process)")
    dec.set_defaults(func=cmd_decompose)

    sim = sub.add_parser("simulate", help="generate a synthetic dataset")
    sim.add_argument("--p1", type=int, required=True)
    sim.add_argument("--p2", type=int, required=True)
    sim.add_argument("--r1", type=int, required=True)
    sim.add_argument("--r2", type=int, required=True)
    sim.add_argument("--rc", type=int, required=True)
    sim.add_argument("--rho", help="comma-separated canonical correlations")
    sim.add_argument("--loading-scale", type=float, default=1.0)
    sim.add_argument("--noise-sd", type=float, default=1.0)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--out", required=True)
    sim.add_argument("--server")
    sim.set_defaults(func=cmd_simulate)

    orc = sub.add_parser("oracle", help="population decomposition from covariance blocks")
    orc.add_argument("--sigma1", required=True)
    orc.add_argument("--sigma2", required=True)
    orc.add_argument("--sigma12", required=True)
    orc.add_argument("--r1", type=int)
    orc.add_argument("--r2", type=int)
    orc.add_argument("--rc", type=int)
    orc.add_argument("--out", required=True)
    orc.add_argument("--server")
    orc.set_defaults(func=cmd_oracle)

    chk = sub.add_parser("check", help="audit a decompose output directory")
    chk.add_argument("--dir", required=True)
    chk.add_argument("--server")
    chk.set_defaults(func=cmd_check)

    srv = sub.add_parser("serve", help="run the HTTP service")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)
    srv.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CODES["config"]
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_CODES["input"]
    except (NumericalError, DcdlfError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_CODES["numerical"]
    except httpx.HTTPError as exc:
        print(f"service unreachable: {exc}", file=sys.stderr)
        return EXIT_CODES["numerical"]


if __name__ == "__main__":
    sys.exit(main())
