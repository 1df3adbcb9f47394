"""Batch runner: ``phisys CONFIG [--out DIR] [-v] [--check-only]``.

Exit status is 0 on success, 1 on configuration or validation failure and 2
on solver failure.
"""

import argparse
import csv
import datetime
import io
import logging
import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import kernels
from .comparison import check_phi_power_convexity, comparison_test, scaled_instance, verdicts_csv
from .errors import ConfigError, PhisysError
from .grid import distance_function
from .nfunction import audit_nfunction
from .solver import (
    RegularizationParams,
    compute_r0,
    continuation_solve,
    delta_policy,
    fit_lower_bound,
    newton_solve,
    solve_barrier,
)
from .system import validate
from .config import RunConfig

log = logging.getLogger("phisys")

EXIT_OK, EXIT_VALIDATION, EXIT_SOLVER = 0, 1, 2


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _nodal_csv(mesh, **cols):
    coords = ["x", "y"][: mesh.dim]
    rows = []
    for i in range(mesh.n_nodes):
        rows.append([repr(float(c)) for c in mesh.nodes[i]] + [repr(float(v.values[i])) for v in cols.values()])
    return _csv_text(coords + list(cols), rows)


class Runner:
    """Executes the experiments of one config, writing into ``stage_dir``."""

    def __init__(self, cfg, stage_dir):
        self.cfg = cfg
        self.dir = Path(stage_dir)
        self.summary = []
        self.ok = True

    def write(self, name, text):
        (self.dir / name).write_text(text)

    def note(self, line):
        self.summary.append(line)
        log.info(line)

    def setup(self):
        cfg = self.cfg
        self.nf = cfg.build_nfunction()
        self.mesh = cfg.build_mesh()
        self.spec = cfg.build_spec(self.nf, self.mesh) if cfg.system else None
        self.note(f"kernel: {self.nf.kernel.family} {tuple(self.nf.kernel.exponents)} ell={self.nf.ell:g} m={self.nf.m:g}")
        self.note(f"mesh: {self.mesh!r}; flux backend: {kernels.BACKEND}")
        if self.spec is None:
            return True
        rep = validate(self.spec)
        self.write("validation.csv", rep.csv())
        self.note("validation:\n" + rep.text())
        if not rep.ok("regularized"):
            return False
        if not rep.ok("theorem"):
            self.note("warning: theorem-level hypotheses fail; regularized solves still run")
        return True

    # -- experiments
    def nfunction_audit(self):
        checks = audit_nfunction(self.nf, seed=self.cfg.seed)
        conv = check_phi_power_convexity(self.nf, strict=False, seed=self.cfg.seed)
        rows = [c.row() for c in checks]
        rows.append(["convexity", f"{conv.n_violations:.12g}", f"{conv.worst:.6e}", "pass" if conv.passed else "fail"])
        self.write("nfunction_audit.csv", _csv_text(["check", "value", "worst_margin", "passed"], rows))
        passed = all(c.passed for c in checks) and conv.passed
        self.note(f"nfunction-audit: {'pass' if passed else 'FAIL'} ({len(rows)} checks)")
        self.ok &= passed

    def _params(self, eps):
        sv = self.cfg.solver
        delta = sv.get("delta", "auto")
        dl = delta_policy(self.spec.structure, eps) if delta == "auto" else float(delta)
        return RegularizationParams(eps, dl, eta=sv.get("eta"))

    def solve(self):
        params = self._params(float(self.cfg.solver.get("eps", 1.0)))
        sol = newton_solve(self.spec, params)
        r0 = compute_r0(self.spec, params)
        d = distance_function(self.mesh)
        C = min(fit_lower_bound(sol.u, d), fit_lower_bound(sol.v, d))
        self.write("solve.csv", _nodal_csv(self.mesh, u=sol.u, v=sol.v))
        inside = sum(sol.norm_pair) <= r0.r0
        self.note(
            f"solve: eps={params.eps:g} delta={params.delta:g} residual={sol.residual_norm:.3e} "
            f"iters={sol.newton_iters} norms=({sol.norm_pair[0]:.6g}, {sol.norm_pair[1]:.6g}) "
            f"r0={r0.r0:.6g} eps_independent={r0.eps_independent} C={C:.6g}"
        )
        self.note(f"solve: norm bound {'pass' if inside else 'FAIL'}, lower bound {'pass' if C > 0 else 'FAIL'}")
        self.ok &= inside and C > 0

    def continuation(self):
        sv = self.cfg.solver
        delta = sv.get("delta", "auto")
        rep = continuation_solve(
            self.spec, self.cfg.schedule(), None if delta == "auto" else float(delta),
            tol=float(sv.get("continuation_tol", 1e-7)), eta=sv.get("eta"),
        )
        self.write("continuation.csv", rep.csv())
        self.write("continuation_solution.csv", _nodal_csv(self.mesh, u=rep.final.u, v=rep.final.v))
        inc = rep.column("increment")[1:]
        r0_ok = all(s.norm_u + s.norm_v <= s.r0 for s in rep.stages)
        C_min = float(rep.column("C_lower").min())
        margin = float(np.nanmin(rep.column("barrier_margin"))) if rep.barriers else float("nan")
        barrier_ok = not rep.barriers or margin >= -1e-8
        mono = bool(np.all(np.diff(inc) < 0)) if inc.size > 1 else True
        self.note(
            f"continuation: {len(rep.stages)} stages, final increment "
            f"{inc[-1] if inc.size else float('nan'):.3e}, increments decreasing={mono}"
        )
        self.note(f"continuation: norm bound {'pass' if r0_ok else 'FAIL'}; min C={C_min:.6g} "
                  f"{'pass' if C_min > 0 else 'FAIL'}; barrier margin {margin:.3e} {'pass' if barrier_ok else 'FAIL'}")
        self.ok &= r0_ok and C_min > 0 and barrier_ok

    def barrier(self):
        w1 = solve_barrier(self.spec, which=1)
        w2 = solve_barrier(self.spec, which=2)
        self.write("barrier.csv", _nodal_csv(self.mesh, w1=w1, w2=w2))
        d = distance_function(self.mesh)
        self.note(f"barrier: max w=({w1.values.max():.6g}, {w2.values.max():.6g}) "
                  f"C=({fit_lower_bound(w1, d):.6g}, {fit_lower_bound(w2, d):.6g})")

    def comparison(self):
        verdicts = []
        for k, item in enumerate(self.cfg.comparison["instances"]):
            name = str(item.get("name", f"instance-{k}"))
            inst = scaled_instance(self.nf, self.mesh, str(item["f"]), float(item.get("scale", 1.0)), name=name)
            v = comparison_test(inst, strict=False)
            expect = item.get("expect", "pass")
            verdicts.append(v)
            good = v.status == expect
            self.note(f"comparison {name}: {v.status} (expected {expect}) margin={v.margin:.3e}")
            self.ok &= good
        self.write("comparison.csv", verdicts_csv(verdicts))

    def run(self):
        for exp in self.cfg.experiments:
            getattr(self, exp.replace("-", "_"))()


def run(cfg, out_dir=None, check_only=False):
    """Run ``cfg``; returns the exit status. Artifacts land in ``out_dir`` only on success."""
    out = Path(out_dir or cfg.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(prefix=".phisys-stage-", dir=out.parent))
    runner = Runner(cfg, stage)
    status = EXIT_OK
    try:
        try:
            valid = runner.setup()
        except (ConfigError, ValueError, PhisysError) as exc:
            runner.note(f"validation error: {exc}")
            valid = False
        if not valid:
            status = EXIT_VALIDATION
        elif not check_only:
            try:
                runner.run()
            except PhisysError as exc:
                runner.note(f"solver error: {type(exc).__name__}: {exc}")
                status = EXIT_SOLVER
        if status == EXIT_OK:
            runner.note(f"overall: {'pass' if runner.ok else 'FAIL'}")
            if out.exists():
                shutil.rmtree(out)
            stage.rename(out)
            target = out
        else:
            shutil.rmtree(stage, ignore_errors=True)
            out.mkdir(parents=True, exist_ok=True)
            target = out
        stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
        header = [f"# phisys run {stamp}", f"# config: {cfg.source}", f"# exit status: {status}"]
        (target / "summary.txt").write_text("\n".join(header + runner.summary) + "\n")
    finally:
        if stage.exists():
            shutil.rmtree(stage, ignore_errors=True)
    return status


def main(argv=None):
    ap = argparse.ArgumentParser(prog="phisys", description="Run Phi-Laplacian system experiments from a config file.")
    ap.add_argument("config", help="YAML or JSON run configuration")
    ap.add_argument("--out", help="output directory (overrides the config)")
    ap.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    ap.add_argument("--check-only", action="store_true", help="validate the config and system without solving")
    args = ap.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig.load(args.config)
    except ConfigError as exc:
        print(f"phisys: {exc}", file=sys.stderr)
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
            (Path(args.out) / "summary.txt").write_text(
                f"# phisys run {stamp}\n# config: {args.config}\n# exit status: {EXIT_VALIDATION}\n"
                f"validation error: {exc}\n"
            )
        return EXIT_VALIDATION
    status = run(cfg, args.out, args.check_only)
    if status:
        print(f"phisys: run failed with status {status}; see summary.txt", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
