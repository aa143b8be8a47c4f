"""Command-line entry point: ``python3 -m sievelab <command> [options]``.

Exit status is 0 on success, 2 when a convergence trend fails and 1 on any
hard error (bad config, failed assumption audit, solver breakdown).
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import assembly, geometry, harness, mesh, report, solvers
from .config import ConfigError, RunConfig, apply_env, config_from_dict, parse_config
from .geometry import DLaw, LimitDomain, PlanError, audit_assumptions, build_sieve_plan, plan_to_json
from .kernel import KernelError, kernel_from_spec

COMMANDS = ("audit", "solve-limit", "solve-sieve", "eigen", "heat", "converge", "robin-converge",
            "dump-mesh", "dump-plan")

_HARD = (ConfigError, PlanError, KernelError, mesh.MeshError, assembly.AssemblyError,
         solvers.SolverError, harness.HarnessError, OSError, ValueError)


class _Run:
    """Objects derived from one config, built lazily."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        om = cfg["omega"]
        self.domain = LimitDomain(cfg["dimension"], om["L"], om["h_minus"], om["h_plus"], cfg["topology"])
        self.kernel = kernel_from_spec(cfg["kernel"], self.domain.gamma)
        self.d_law = DLaw(cfg["d_law"]["c"], cfg["d_law"]["p"])
        m = cfg["mesh"]
        self.schedule = harness.EpsilonSchedule(
            tuple(cfg["eps"]), self.d_law, cfg["model"], m["h0"],
            mesh.Grading(rings=m["grading_rings"], edges_per_hole=m["edges_per_hole"],
                         min_angle=m["min_angle"]),
            m["passage_layers"], m["aspect_cap"], m["full_h0"])
        self.out = Path(cfg["output_dir"])
        self.threads = int(cfg["threads"])
        self._plans = None

    @property
    def plans(self) -> dict:
        if self._plans is None:
            scale = float(self.cfg["hole_scale"])
            plans = {}
            for eps in self.cfg["eps"]:
                p = build_sieve_plan(self.domain, eps, self.d_law, self.kernel)
                plans[eps] = p.with_hole_scale(scale) if scale != 1.0 else p
            self._plans = plans
        return self._plans

    def need_mesh(self):
        if self.domain.n != 2:
            raise mesh.MeshError("meshing and solving are implemented for n = 2 only")

    def cases(self):
        self.need_mesh()
        return harness.build_cases(self.domain, self.kernel, self.schedule, self.threads,
                                   quad_points=self.cfg["mesh"]["quad_points"], plans=self.plans)

    def path(self, name: str) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        return self.out / name


def _say(msg: str) -> None:
    print(msg, flush=True)


def _audit_gate(run: _Run) -> bool:
    ok = True
    for eps, plan in run.plans.items():
        rep = audit_assumptions(plan, run.d_law)
        if not rep.passed:
            print(f"audit failed at eps={eps!r}: {', '.join(rep.failed_ids)}", file=sys.stderr)
            ok = False
    return ok


def _trend_status(trends) -> int:
    bad = 0
    for t in trends:
        tag = "SKIP" if t.skipped else ("PASS" if t.passed else "FAIL")
        vals = ", ".join(f"{v:.4e}" for v in t.values)
        _say(f"{tag} {t.name}: [{vals}]")
        bad += (not t.passed) and not t.skipped
    return 2 if bad else 0


def _emit(run: _Run, name: str, records) -> None:
    k = int(run.cfg["eigen"]["k"])
    report.write_records(run.path(f"{name}.csv"), records, k, run.cfg.hash, bool(run.cfg["timings"]))
    series = {}
    for exp, attr in (("resolvent", "err_l2"), ("resolvent", "err_h1b"), ("heat", "heat_sup_err")):
        rows = [r for r in records if r.experiment == exp]
        if rows:
            series[f"{exp} {attr}"] = ([r.eps for r in rows], [getattr(r, attr) for r in rows])
    rows = [r for r in records if r.experiment == "eigen"]
    for i in range(k):
        if rows and all(len(r.lam_err) > i for r in rows):
            series[f"lambda_{i + 1}"] = ([r.eps for r in rows], [r.lam_err[i] for r in rows])
    report.write_svg_plot(run.path(f"{name}.svg"), series, title=name)
    _say(f"wrote {run.path(name + '.csv')}")


# ---------------------------------------------------------------- commands

def cmd_audit(run: _Run) -> int:
    rows = []
    ok = True
    for eps, plan in run.plans.items():
        rep = audit_assumptions(plan, run.d_law)
        _say(f"eps = {eps!r}: {'passed' if rep.passed else 'FAILED ' + ', '.join(rep.failed_ids)}")
        for line in rep.lines():
            _say("  " + line)
        for e in rep.entries:
            rows.append([report.fmt(float(eps)), e.id, int(bool(e.passed)), report.fmt(float(e.measured)),
                         e.threshold, int(bool(e.gating)), run.cfg.hash])
        ok &= rep.passed
    with run.path("audit.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["eps", "check", "passed", "measured", "threshold", "gating", "config_hash"])
        w.writerows(rows)
    return 0 if ok else 1


def _limit_setup(run: _Run):
    run.need_mesh()
    lm = mesh.mesh_limit_domain(run.domain, run.cfg["mesh"]["h0"],
                                mesh.Grading(min_angle=run.cfg["mesh"]["min_angle"]))
    return lm, assembly.limit_operator(lm, run.kernel, run.cfg["mesh"]["quad_points"])


def cmd_solve_limit(run: _Run) -> int:
    lm, op = _limit_setup(run)
    lin = run.cfg["linear"]
    f = harness.source_vector(lm, run.cfg["source"])
    u, st = solvers.solve_shifted(op, f, 1.0, tol=lin["tol"], maxiter=lin["maxit"])
    with run.path("solve_limit.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "side", "u", "config_hash"])
        for (x, y), s, val in zip(lm.vertices.tolist(), lm.side.tolist(), u.tolist()):
            w.writerow([report.fmt(x), report.fmt(y), s, report.fmt(val), run.cfg.hash])
    _say(f"{op.tag}: {op.n} dofs, {st.iterations} CG iterations, residual {st.residual:.2e}")
    return 0


def cmd_solve_sieve(run: _Run) -> int:
    if not _audit_gate(run):
        return 1
    lin = run.cfg["linear"]
    rows = []
    for case in run.cases():
        f = harness.lift_L(harness.source_vector(case.lmesh, run.cfg["source"]), case)
        pre = "lu" if case.gmesh is not None else "jacobi"
        u, st = solvers.solve_shifted(case.sieve, f, 1.0, tol=lin["tol"], maxiter=lin["maxit"], precond=pre)
        mass = float(np.ones(case.sieve.n) @ (case.sieve.M @ u))
        rows.append([report.fmt(float(case.eps)), case.fidelity, case.sieve.n, st.iterations,
                     report.fmt(harness.l2_norm(case.sieve, u)), report.fmt(mass), run.cfg.hash])
        _say(f"eps = {case.eps!r}: {case.sieve.tag}, {case.sieve.n} dofs, {st.iterations} CG iterations")
    with run.path("solve_sieve.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["eps", "model", "dofs_sieve", "cg_iters", "l2_norm", "mass", "config_hash"])
        w.writerows(rows)
    return 0


def cmd_eigen(run: _Run) -> int:
    if not _audit_gate(run):
        return 1
    recs, trends = harness.run_eigen_convergence(run.cases(), int(run.cfg["eigen"]["k"]), run.threads,
                                                 run.cfg["eigen"]["tol"])
    _emit(run, "eigen", recs)
    return _trend_status(trends)


def cmd_heat(run: _Run) -> int:
    if not _audit_gate(run):
        return 1
    h = run.cfg["heat"]
    recs, trend = harness.run_heat_convergence(run.cases(), run.cfg["source"], h["T"], h["steps"], h["samples"],
                                               h["theta"], run.threads, run.cfg["linear"]["tol"])
    _emit(run, "heat", recs)
    return _trend_status([trend])


def cmd_converge(run: _Run) -> int:
    if not _audit_gate(run):
        return 1
    cfg = run.cfg
    cases = run.cases()
    src, h = cfg["source"], cfg["heat"]
    if run.domain.topology == "boundary":
        recs, trends = harness.run_robin_convergence(cases, src, int(cfg["eigen"]["k"]), h["T"], h["steps"],
                                                     h["samples"], run.threads)
    else:
        r1, t1 = harness.run_resolvent_convergence(cases, src, run.threads, cfg["linear"]["tol"])
        r2, t2 = harness.run_eigen_convergence(cases, int(cfg["eigen"]["k"]), run.threads, cfg["eigen"]["tol"])
        r3, t3 = harness.run_heat_convergence(cases, src, h["T"], h["steps"], h["samples"], h["theta"],
                                              run.threads, cfg["linear"]["tol"])
        recs, trends = r1 + r2 + r3, [t1, *t2, t3]
    ratios, tp = harness.passage_energy_check(cases, src)
    if tp.skipped and not ratios:
        _say("passage energy check skipped (reduced model has no passage mesh)")
    else:
        for c, r in zip(cases, ratios):
            recs.append(harness.ConvergenceRecord("passage", c.eps, c.fidelity, c.n_limit, c.sieve.n,
                                                  passage_ratio=r))
        trends.append(tp)
    _emit(run, "converge", recs)
    return _trend_status(trends)


def cmd_robin_converge(run: _Run) -> int:
    changes = {"topology": "boundary"}
    if run.cfg["source"] == "sign":
        changes["source"] = "x1sq"
    return cmd_converge(_Run(run.cfg.replace(**changes)))


def _merge_meshes(meshes) -> mesh.TriMesh:
    verts, tris, groups, off = [], [], {}, 0
    for m in meshes:
        verts.append(m.vertices)
        tris.append(m.triangles + off)
        for name, e in m.boundary_groups.items():
            groups.setdefault(name, []).append(np.asarray(e).reshape(-1, 2) + off)
        off += m.n_vertices
    return mesh.TriMesh(np.vstack(verts), np.vstack(tris), {k: np.vstack(v) for k, v in groups.items()})


def cmd_dump_mesh(run: _Run) -> int:
    if run.cfg["model"] == "reduced":
        lm, op = _limit_setup(run)
        mesh.dump_mesh(lm.mesh, run.path("mesh_limit.txt"))
        assembly.dump_operator(op, run.path("operators"))
        _say(f"wrote limit mesh: {lm.mesh.n_vertices} vertices, {lm.mesh.n_triangles} triangles")
        return 0
    for case in run.cases():
        tag = f"eps{case.eps:.6g}"
        mesh.dump_mesh(case.gmesh.bulk.mesh, run.path(f"mesh_{tag}_bulk.txt"))
        mesh.dump_mesh(_merge_meshes(case.gmesh.passages), run.path(f"mesh_{tag}_passages.txt"))
        assembly.dump_operator(case.sieve, run.path(f"operators_{tag}"))
        _say(f"eps = {case.eps!r}: {case.sieve.n} dofs, {len(case.gmesh.passages)} passages")
    return 0


def cmd_dump_plan(run: _Run) -> int:
    for eps, plan in run.plans.items():
        p = run.path(f"plan_eps{eps:.6g}.json")
        p.write_text(plan_to_json(plan))
        _say(f"wrote {p}: {plan.n_holes} holes, {plan.n_passages} passages")
    return 0


_DISPATCH = {
    "audit": cmd_audit, "solve-limit": cmd_solve_limit, "solve-sieve": cmd_solve_sieve,
    "eigen": cmd_eigen, "heat": cmd_heat, "converge": cmd_converge,
    "robin-converge": cmd_robin_converge, "dump-mesh": cmd_dump_mesh, "dump-plan": cmd_dump_plan,
}


def dispatch(command: str, cfg: RunConfig) -> int:
    if command not in _DISPATCH:
        raise ConfigError(f"unknown command {command!r}")
    return _DISPATCH[command](_Run(cfg))


# ---------------------------------------------------------------- argv

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sievelab", description="Neumann sieve convergence experiments.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", metavar="PATH", help="JSON run configuration")
    ap.add_argument("--eps-list", help="comma separated, strictly decreasing eps values")
    ap.add_argument("--kernel", help="kernel kind or a JSON object such as '{\"kind\": \"gaussian\"}'")
    ap.add_argument("--model", choices=("reduced", "full"))
    ap.add_argument("--source", choices=("one", "sign", "x1sq"))
    ap.add_argument("--threads", type=int, metavar="N")
    ap.add_argument("--out", metavar="DIR", help="output directory")
    return ap


def load_config(args) -> RunConfig:
    cfg = parse_config(args.config) if args.config else config_from_dict({})
    cfg = apply_env(cfg)
    changes = {}
    if args.eps_list:
        try:
            changes["eps"] = [float(t) for t in args.eps_list.split(",") if t.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad --eps-list: {exc}") from exc
    if args.kernel:
        k = args.kernel.strip()
        try:
            changes["kernel"] = json.loads(k) if k.startswith("{") else {"kind": k}
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad --kernel: {exc}") from exc
    for key in ("model", "source", "threads"):
        if getattr(args, key) is not None:
            changes[key] = getattr(args, key)
    if args.out:
        changes["output_dir"] = args.out
    return cfg.replace(**changes) if changes else cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return dispatch(args.command, load_config(args))
    except _HARD as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
