#!/usr/bin/env python3
"""
hankellab command line: batch experiments on Hankel sections, embedding
functionals and counterexample ladders, with JSON reports and CSV tables.
"""
import argparse
import logging
import sys
from typing import Dict, List, Optional, Sequence

from core.counterexamples import (
    FAMILIES,
    DP1Config,
    bennett_gap,
    dp1_closed_form,
    dp1_section_norms,
    dp2_growth,
    lacunary_symbol,
    order_control_ratios,
    primitive_norm_check,
)
from core.errors import HankelLabError
from core.experiment_runner import ExperimentRunner
from core.functionals import (
    analytic_embedding_value,
    co_rank_one_embedding_value,
    gram_embedding_value,
    leibniz_bound_report,
    norm_chain,
    rank_one_embedding_value,
    rk_thesis_value,
    weak_bmoa_value,
)
from core.multipliers import apply_D
from core.spaces import bloch_norm, carleson_sweep
from core.symbol_io import (
    complex_pair,
    csv_row,
    dumps,
    finite_or_none,
    load_measure,
    load_symbol,
    load_vector,
    make_report,
    write_csv,
)
from hankellab_config import APP_CONFIG, EXPERIMENT_CONFIG, SPACES_CONFIG

logger = logging.getLogger("hankellab")

EMBEDDING_MODES = ("analytic", "anti", "weak", "rk", "rank-one", "co-rank-one", "leibniz")


def int_list(text: str) -> List[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def float_list(text: str) -> List[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def int_range(text: str) -> List[int]:
    """'a..b' inclusive, or a single integer"""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo, hi = int(lo), int(hi)
        else:
            lo = hi = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a range like 1..12, got {text!r}")
    if hi < lo:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return list(range(lo, hi + 1))


class HankelLabApp:
    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.runner = ExperimentRunner(threads=args.threads)
        self.rows: List[Dict] = []

    # ------------------------------------------------------------ commands

    def run_norm_chain(self) -> Dict:
        phi = load_symbol(self.args.symbol)
        report = norm_chain(phi, self.args.alpha, self.args.n, with_bloch=self.args.bloch)
        logger.info(f"[CLI] norm chain values {report.values}")
        for k, value in enumerate(report.values, start=1):
            self.rows.append(csv_row(f"norm_chain.value{k}", report.alpha, report.N_used, value))
        return report.to_dict()

    def run_embedding(self) -> Dict:
        mode = self.args.mode
        alpha = self.args.alpha
        if mode in ("rank-one", "co-rank-one"):
            v = load_vector(self.args.symbol)
            N = v.degree if self.args.n is None else self.args.n
            fn = rank_one_embedding_value if mode == "rank-one" else co_rank_one_embedding_value
            value = fn(v, alpha, N)
            self.rows.append(csv_row(f"embedding.{mode}", alpha, N, value))
            return {"mode": mode, "alpha": alpha, "N": N, "value": value}

        phi = load_symbol(self.args.symbol)
        N = phi.degree if self.args.n is None else self.args.n
        if mode == "leibniz":
            report = leibniz_bound_report(phi, N)
            self.rows.append(csv_row("embedding.leibniz_ratio", None, N, report.ratio))
            return {"mode": mode, "N": N, "hankel_norm": report.hankel_norm, "bmoa_c": report.bmoa_c,
                    "bmoa_c_conjugate": report.bmoa_c_conjugate, "ratio": finite_or_none(report.ratio)}
        if mode == "weak":
            result = weak_bmoa_value(phi, alpha, N=N)
            self.rows.append(csv_row("embedding.weak", alpha, N, result.value))
            return {"mode": mode, "alpha": alpha, "N": N, "value": result.value,
                    "argmax": complex_pair(result.argmax)}
        if mode == "rk":
            result = rk_thesis_value(phi, alpha, N=N)
            self.rows.append(csv_row("embedding.rk_kernel", alpha, N, result.kernel_value))
            self.rows.append(csv_row("embedding.rk_section", alpha, N, result.section_value))
            return {"mode": mode, "alpha": alpha, "N": N,
                    "kernel_value": result.kernel_value, "kernel_argmax": complex_pair(result.kernel_argmax),
                    "section_value": result.section_value, "section_argmax": complex_pair(result.section_argmax)}

        psi = phi if self.args.raw else apply_D(1.0 + alpha, phi)
        fn = analytic_embedding_value if mode == "analytic" else gram_embedding_value
        value = fn(psi, N)
        self.rows.append(csv_row(f"embedding.{mode}", None if self.args.raw else alpha, N, value))
        return {"mode": mode, "alpha": None if self.args.raw else alpha, "N": N, "value": value}

    def run_dp1(self) -> Dict:
        alpha = self.args.alpha
        cfg = DP1Config(alpha, max(self.args.n_ladder), self.args.beta_rule)
        rows = dp1_section_norms(cfg, self.args.n_ladder, runner=self.runner)
        closed = dp1_closed_form(cfg)
        out = []
        for row in rows:
            self.rows.append(csv_row("dp1.sigma_XD", alpha, row.N, row.right_norm))
            self.rows.append(csv_row("dp1.sigma_DX", alpha, row.N, row.left_norm))
            self.rows.append(csv_row("dp1.closed_right", alpha, row.N, row.closed_right))
            self.rows.append(csv_row("dp1.closed_left", alpha, row.N, row.closed_left))
            out.append(row._asdict())
        return {"alpha": alpha, "beta_rule": self.args.beta_rule, "rows": out,
                "tail_bound": finite_or_none(closed.tail_bound)}

    def run_dp2(self) -> Dict:
        alpha = self.args.alpha
        rows = dp2_growth(alpha, self.args.n_ladder, self.args.family, seed=self.args.seed, runner=self.runner)
        for row in rows:
            self.rows.append(csv_row("dp2.lower_bound", alpha, row.N, row.value, row.witness))
        small, large = bennett_gap(alpha, 50, 100)
        return {"alpha": alpha, "family": self.args.family, "rows": [r._asdict() for r in rows],
                "bennett_gap": {"m": 50, "factor": 100, "row_limit": small, "column_limit": large}}

    def run_lemma_order(self) -> Dict:
        alpha = self.args.alpha
        psi = lacunary_symbol() if self.args.psi == "lacunary" else load_symbol(self.args.psi)
        ratios = order_control_ratios(psi, alpha, self.args.l_range, self.args.n, runner=self.runner)
        for l, ratio in ratios:
            self.rows.append(csv_row("lemma_order.ratio", alpha, self.args.n, ratio, f"l={l}"))
        return {"alpha": alpha, "N": self.args.n, "psi": self.args.psi,
                "ratios": [{"l": l, "ratio": r} for l, r in ratios]}

    def run_lemma_primitive(self) -> Dict:
        out = []
        for alpha in self.args.alpha_set:
            for l in self.args.l_range:
                for nzero in self.args.nzero_range:
                    check = primitive_norm_check(alpha, l, nzero)
                    out.append({"alpha": alpha, "l": l, "N_zero": nzero, "lhs": check.lhs,
                                "rhs": check.rhs, "rel_gap": check.rel_gap})
                    self.rows.append(csv_row("lemma_primitive.rel_gap", alpha, nzero, check.rel_gap, f"l={l}"))
        return {"checks": out, "max_rel_gap": max(c["rel_gap"] for c in out)}

    def run_carleson(self) -> Dict:
        mu = load_measure(self.args.measure)
        result = carleson_sweep(mu, self.args.levels)
        self.rows.append(csv_row("carleson.intensity", None, self.args.levels, result.value))
        return {"levels": self.args.levels, "value": result.value, "level": result.level,
                "center": result.center, "atoms": int(mu.points.size)}

    def run_bloch(self) -> Dict:
        phi = load_symbol(self.args.symbol)
        result = bloch_norm(phi)
        self.rows.append(csv_row("bloch.norm", None, phi.degree, result.value))
        return {"value": result.value, "argmax": complex_pair(result.argmax), "degree": phi.degree}

    # -------------------------------------------------------------- output

    def run(self) -> int:
        command = self.args.command
        handler = getattr(self, "run_" + command.replace("-", "_"))
        payload = handler()
        report = make_report(command, payload, APP_CONFIG["schema"], timestamp=not self.args.no_timestamp)
        text = dumps(report)
        if self.args.out:
            with open(self.args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
            logger.info(f"[CLI] report written to {self.args.out}")
        else:
            sys.stdout.write(text)
        if self.args.csv:
            with open(self.args.csv, "w", encoding="utf-8", newline="") as fh:
                count = write_csv(self.rows, fh)
            logger.info(f"[CLI] {count} CSV row(s) written to {self.args.csv}")
        return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=APP_CONFIG["app_name"], description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {APP_CONFIG['version']}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0,
                        help="seed of the dp2 Gaussian witnesses; power-iteration restarts always "
                             "use LINALG_CONFIG restart_seed")
    common.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (default ${EXPERIMENT_CONFIG['threads_env']} or "
                             f"{EXPERIMENT_CONFIG['threads']})")
    common.add_argument("--no-timestamp", action="store_true", help="omit generated_at from the report")
    common.add_argument("--out", help="JSON report path (default stdout)")
    common.add_argument("--csv", help="CSV table path")
    common.add_argument("--log-level", default=APP_CONFIG["log_level"],
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("norm-chain", parents=[common], help="the six comparable norms of a symbol")
    p.add_argument("symbol")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--n", type=int, default=None, help="truncation (default: symbol degree)")
    p.add_argument("--bloch", action="store_true", help="also report ||D^alpha phi||_B")

    p = sub.add_parser("embedding", parents=[common], help="embedding functionals of a symbol")
    p.add_argument("symbol", help="symbol file (vector file for rank-one modes)")
    p.add_argument("--mode", choices=EMBEDDING_MODES, default="anti")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--raw", action="store_true", help="analytic/anti: use the symbol itself, not D^(1+alpha) phi")

    p = sub.add_parser("dp1", parents=[common], help="rank-one-valued counterexample ladder")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--n-ladder", type=int_list, default=EXPERIMENT_CONFIG["dp1_ladder"])
    p.add_argument("--beta-rule", choices=["default", "zero"], default="default")

    p = sub.add_parser("dp2", parents=[common], help="Schur multiplier lower-bound ladder")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--n-ladder", type=int_list, default=EXPERIMENT_CONFIG["dp2_ladder"])
    p.add_argument("--family", choices=FAMILIES, default="all")

    p = sub.add_parser("lemma-order", parents=[common], help="order-shift control ratios")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--l-range", type=int_range, default=list(range(1, EXPERIMENT_CONFIG["lemma_order_l_max"] + 1)))
    p.add_argument("--psi", default="lacunary", help="'lacunary' or a symbol file")
    p.add_argument("--n", type=int, default=EXPERIMENT_CONFIG["lemma_order_n"])

    p = sub.add_parser("lemma-primitive", parents=[common], help="primitive norm equality on monomials")
    p.add_argument("--alpha-set", type=float_list, default=[0.5, 1.0, 2.0])
    p.add_argument("--l-range", type=int_range, default=list(range(1, 7)))
    p.add_argument("--nzero-range", type=int_range, default=list(range(0, 33)))

    p = sub.add_parser("carleson", parents=[common], help="Carleson intensity of an atomic measure")
    p.add_argument("measure")
    p.add_argument("--levels", type=int, default=SPACES_CONFIG["carleson_levels"])

    p = sub.add_parser("bloch", parents=[common], help="Bloch norm of a symbol")
    p.add_argument("symbol")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one hankellab command; returns the process exit code"""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return HankelLabApp(args).run()
    except HankelLabError as e:
        print(f"hankellab: {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    except KeyboardInterrupt:
        logger.warning("[CLI] interrupted")
        return 130
    except Exception as e:
        logger.exception(f"[CLI] unexpected error: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
