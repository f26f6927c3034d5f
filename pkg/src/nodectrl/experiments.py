"""Experiment runners behind the CLI subcommands.

Each runner reads its parameters from a parsed config, derives every random
stream from the master seed via rng.derive, writes CSV/SVG files plus a JSON
manifest into its own directory, and returns a metrics dict. File contents are
byte-identical across reruns with the same config and seed; the manifest (which
carries the wall clock) is the one file excluded from that contract.
"""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import rng as rng_mod
from .activations import get_activation
from .config import config_echo, config_floats
from .controllability import (
    closed_form_flow,
    duality_terms,
    hum_solve_terminal,
    static_control,
)
from .dynamics import integrate_ensemble, loss_micro
from .errors import ConfigurationError
from .meanfield import (
    Density1D,
    gaussian_density,
    loss_meanfield,
    push_forward_particles,
    solve_meanfield,
    wasserstein1,
)
from .optimize import BoxDomain, pgd, project
from .output import svg_heatmap, svg_line_plot, write_csv, write_manifest, write_text
from .schedules import constant_schedule, exp_schedule, power_schedule
from .surrogate import GaussianKernelSurrogate, fit_interpolation, relative_error_field

__version__ = "0.1.0"


def ordered_map(fn, items, threads=1):
    """Map preserving input order; thread fan-out is safe because every task is
    pure and owns its derived random streams, so results are independent of
    scheduling."""
    items = list(items)
    if threads and int(threads) > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as ex:
            return list(ex.map(fn, items))
    return [fn(it) for it in items]


def _axis(lo, hi, count):
    step = (hi - lo) / (count - 1)
    return lo + step * np.arange(count)


def place_nodes(w_values, b_values, n_nodes, rng):
    """Deterministic corner-pinned stratified node placement, on grid.

    The four box corners are always nodes: an interpolating kernel surrogate
    decays toward zero outside its node hull, and an unpinned corner can turn
    into a spurious below-the-data minimum that traps the projected descent.
    The remaining nodes take column indices spread evenly over the w grid and
    b indices from a seeded permutation of an even spread; any repeated column
    replaces later b picks with the value farthest from those already used
    there, so no two nodes coincide. Fewer than five nodes fall back to the
    plain stratified spread without pinning.
    """
    nw, nb = len(w_values), len(b_values)
    if n_nodes < 1:
        raise ConfigurationError(f"need n_nodes >= 1, got {n_nodes}")
    corners = list(dict.fromkeys([(0, 0), (0, nb - 1), (nw - 1, 0), (nw - 1, nb - 1)]))
    if n_nodes <= len(corners):
        if n_nodes == 1:
            out_c, out_b = [nw // 2], [nb // 2]
        else:
            out_c = list(np.round(np.linspace(0, nw - 1, n_nodes)).astype(int))
            out_b = list(rng.permutation(np.round(np.linspace(0, nb - 1, n_nodes)).astype(int)))
        used = {}
    else:
        out_c = [c for c, _ in corners]
        out_b = [b for _, b in corners]
        used = {0: sorted({0, nb - 1}), nw - 1: sorted({0, nb - 1})}
    m = n_nodes - len(out_c)
    if m > 0:
        cols = np.round(np.linspace(0, nw - 1, m)).astype(int) if m > 1 else np.array([nw // 2])
        b_pool = np.round(np.linspace(0, nb - 1, m)).astype(int) if m > 1 else np.array([nb // 2])
        b_perm = rng.permutation(b_pool)
        for k in range(m):
            c = int(cols[k])
            if c in used:
                taken = used[c]
                far = max(range(nb), key=lambda j: (min(abs(j - t) for t in taken), -j))
                b = far
                used[c].append(far)
            else:
                b = int(b_perm[k])
                used[c] = [b]
            out_c.append(c)
            out_b.append(b)
    # duplicate-free by construction within columns; resolve any residual clash
    seen = set()
    for k in range(len(out_c)):
        while (out_c[k], out_b[k]) in seen:
            out_b[k] = (out_b[k] + 1) % nb
        seen.add((out_c[k], out_b[k]))
    cols = np.array(out_c)
    b_idx = np.array(out_b)
    nodes = np.column_stack([np.asarray(w_values)[cols], np.asarray(b_values)[b_idx]])
    return nodes, cols, b_idx


def _farthest_corner(box, p):
    corners = box.corners()
    dist = ((corners - np.asarray(p)) ** 2).sum(axis=1)
    return corners[int(np.argmax(dist))]


# -- microscopic experiments ---------------------------------------------------


class _MicroSetup:
    def __init__(self, cp):
        sec = cp["micro"]
        self.seed = cp.getint("common", "seed")
        self.M = sec.getint("M")
        self.act = sec.get("activation")
        self.t0, self.T, self.dt = sec.getfloat("t0"), sec.getfloat("T"), sec.getfloat("dt")
        self.box = BoxDomain(
            sec.getfloat("w_min"), sec.getfloat("w_max"),
            sec.getfloat("b_min"), sec.getfloat("b_max"),
        )
        self.w_values = _axis(self.box.w_min, self.box.w_max, sec.getint("grid_w"))
        self.b_values = _axis(self.box.b_min, self.box.b_max, sec.getint("grid_b"))
        self.center = np.array(
            [(self.w_values[0] + self.w_values[-1]) / 2, (self.b_values[0] + self.b_values[-1]) / 2]
        )
        self.gamma = sec.getfloat("gamma")
        self.n_nodes = sec.getint("n_nodes")
        self.ell = sec.get("loss")
        self.x0 = rng_mod.derive(self.seed, rng_mod.ENSEMBLE).uniform(
            sec.getfloat("x0_low"), sec.getfloat("x0_high"), self.M
        )
        self.y = float(self._finals(self.center[0], self.center[1]).mean())

    def _schedule(self, w, b):
        return constant_schedule(w, b, self.t0, self.T, self.dt)

    def _finals(self, w, b):
        return integrate_ensemble(self.x0, self._schedule(w, b), self.act)

    def loss_at(self, w, b):
        finals = self._finals(w, b)
        return loss_micro(finals, np.full_like(finals, self.y), ell=self.ell)

    def loss_field(self, threads=1):
        pts = [(w, b) for w in self.w_values for b in self.b_values]
        vals = ordered_map(lambda p: self.loss_at(*p), pts, threads)
        return np.array(vals).reshape(len(self.w_values), len(self.b_values))

    def mean_trajectory(self, w, b):
        """Ensemble mean at every grid time (d = 1 vectorized loop)."""
        act = get_activation(self.act)
        sched = self._schedule(w, b)
        x = self.x0.copy()
        means = np.empty(sched.n_steps + 1)
        means[0] = x.mean()
        for k in range(sched.n_steps):
            t = sched.t0 + k * sched.dt
            x = x + sched.dt * act(w * x + b)
            means[k + 1] = x.mean()
        return sched.times(), means


def _fit_on_grid(setup, field, rng):
    nodes, cols, b_idx = place_nodes(setup.w_values, setup.b_values, setup.n_nodes, rng)
    values = field[cols, b_idx]
    surr = fit_interpolation(nodes, values, setup.gamma)
    return surr, nodes, values


def run_micro_surface(cp, out_dir, threads=1):
    setup = _MicroSetup(cp)
    field = setup.loss_field(threads)
    surr, nodes, node_values = _fit_on_grid(
        setup, field, rng_mod.derive(setup.seed, rng_mod.NODES)
    )
    grid = np.array([(w, b) for w in setup.w_values for b in setup.b_values])
    pred = surr.predict(grid)
    rel, rel_min, rel_max, skipped = relative_error_field(surr, field.reshape(-1), grid)
    node_pred = surr.predict(nodes)
    node_rel = float(np.max(np.abs(node_pred - node_values) / np.abs(node_values)))

    files = {}
    files["loss_true.csv"] = write_csv(
        os.path.join(out_dir, "loss_true.csv"), ["w", "b", "loss"],
        [(w, b, field[i, j]) for i, w in enumerate(setup.w_values)
         for j, b in enumerate(setup.b_values)],
    )
    files["loss_surrogate.csv"] = write_csv(
        os.path.join(out_dir, "loss_surrogate.csv"), ["w", "b", "value"],
        [(grid[k, 0], grid[k, 1], pred[k]) for k in range(grid.shape[0])],
    )
    files["relerr.csv"] = write_csv(
        os.path.join(out_dir, "relerr.csv"), ["w", "b", "rel_err"],
        [(grid[k, 0], grid[k, 1], rel[k]) for k in range(grid.shape[0])],
    )
    files["nodes.csv"] = write_csv(
        os.path.join(out_dir, "nodes.csv"), ["w", "b", "value"],
        [(nodes[k, 0], nodes[k, 1], node_values[k]) for k in range(nodes.shape[0])],
    )
    files["surrogate.json"] = write_text(
        os.path.join(out_dir, "surrogate.json"), surr.to_json()
    )
    nb = len(setup.b_values)
    files["loss_true.svg"] = svg_heatmap(
        os.path.join(out_dir, "loss_true.svg"), setup.w_values, setup.b_values,
        field, title="training loss over (w, b)",
    )
    files["loss_surrogate.svg"] = svg_heatmap(
        os.path.join(out_dir, "loss_surrogate.svg"), setup.w_values, setup.b_values,
        pred.reshape(-1, nb), title="kernel surrogate",
    )
    files["relerr.svg"] = svg_heatmap(
        os.path.join(out_dir, "relerr.svg"), setup.w_values, setup.b_values,
        np.log10(np.maximum(rel.reshape(-1, nb), 1e-300)), title="log10 relative error",
    )
    metrics = {
        "target_y": setup.y,
        "center_w": float(setup.center[0]),
        "center_b": float(setup.center[1]),
        "node_rel_max": node_rel,
        "grid_rel_min": rel_min,
        "grid_rel_max": rel_max,
        "guard_skipped": skipped,
        "jitter": surr.jitter_,
        "rows": int(grid.shape[0]),
    }
    write_manifest(
        os.path.join(out_dir, "manifest.json"), config_echo(cp), files,
        extras={"node_placement": "corner-pinned stratified on-grid", **metrics}, version=__version__,
    )
    return {"files": files, **metrics}


def run_micro_descent(cp, out_dir, threads=1):
    setup = _MicroSetup(cp)
    sec = cp["micro"]
    field = setup.loss_field(threads)
    surr, _, _ = _fit_on_grid(setup, field, rng_mod.derive(setup.seed, rng_mod.NODES))
    argmin = np.unravel_index(int(np.argmin(field)), field.shape)
    grid_min = np.array([setup.w_values[argmin[0]], setup.b_values[argmin[1]]])
    start = _farthest_corner(setup.box, grid_min)
    trace = pgd(
        surr.predict_one, surr.gradient_one, start, setup.box,
        step=sec.getfloat("step"), max_iters=sec.getint("max_iters"),
        grad_tol=sec.getfloat("grad_tol"), step_tol=sec.getfloat("step_tol"),
    )
    final = trace.final
    final_mean = float(setup._finals(final[0], final[1]).mean())

    files = {}
    files["trace.csv"] = write_csv(
        os.path.join(out_dir, "trace.csv"), ["iter", "w", "b", "objective"],
        [(k, trace.iterates[k, 0], trace.iterates[k, 1], trace.objectives[k])
         for k in range(trace.iterates.shape[0])],
    )
    rows = []
    t, m_start = setup.mean_trajectory(start[0], start[1])
    _, m_final = setup.mean_trajectory(final[0], final[1])
    _, m_center = setup.mean_trajectory(setup.center[0], setup.center[1])
    for k in range(t.shape[0]):
        rows.append((t[k], m_start[k], m_final[k], m_center[k]))
    files["mean_trajectories.csv"] = write_csv(
        os.path.join(out_dir, "mean_trajectories.csv"),
        ["t", "mean_start", "mean_final", "mean_center"], rows,
    )
    files["objective.svg"] = svg_line_plot(
        os.path.join(out_dir, "objective.svg"),
        np.arange(trace.objectives.shape[0]), {"surrogate objective": trace.objectives},
        title="projected gradient descent", xlabel="iteration", ylabel="objective",
    )
    files["mean_trajectories.svg"] = svg_line_plot(
        os.path.join(out_dir, "mean_trajectories.svg"), t,
        {"start": m_start, "optimized": m_final, "center": m_center},
        title="ensemble mean under initial, optimized, center parameters",
        xlabel="t", ylabel="mean state",
    )
    metrics = {
        "start_w": float(start[0]), "start_b": float(start[1]),
        "final_w": float(final[0]), "final_b": float(final[1]),
        "final_objective": float(trace.objectives[-1]),
        "final_mean": final_mean,
        "target_y": setup.y,
        "mean_rel_diff": abs(final_mean - setup.y) / abs(setup.y),
        "stop_reason": trace.stop_reason,
        "iters": int(trace.iterates.shape[0] - 1),
        "final_in_box": bool(setup.box.contains(final)),
    }
    write_manifest(
        os.path.join(out_dir, "manifest.json"), config_echo(cp), files,
        extras={"start_rule": "corner farthest from grid argmin", **metrics},
        version=__version__,
    )
    return {"files": files, **metrics}


# -- mean-field experiments ----------------------------------------------------


class _MeanfieldSetup:
    def __init__(self, cp):
        sec = cp["meanfield"]
        self.seed = cp.getint("common", "seed")
        self.act = sec.get("activation")
        self.t0, self.T, self.dt = sec.getfloat("t0"), sec.getfloat("T"), sec.getfloat("dt")
        self.convention = sec.get("gaussian_convention")
        self.rho0 = gaussian_density(
            sec.getfloat("mean0"), sec.getfloat("spread0"),
            sec.getfloat("xmin"), sec.getfloat("xmax"), sec.getfloat("dx"),
            convention=self.convention,
        )
        self.box = BoxDomain(
            sec.getfloat("w_min"), sec.getfloat("w_max"),
            sec.getfloat("b_min"), sec.getfloat("b_max"),
        )
        self.w_values = _axis(self.box.w_min, self.box.w_max, sec.getint("grid_w"))
        self.b_values = _axis(self.box.b_min, self.box.b_max, sec.getint("grid_b"))
        self.center = np.array(
            [(self.w_values[0] + self.w_values[-1]) / 2, (self.b_values[0] + self.b_values[-1]) / 2]
        )
        self.gamma = sec.getfloat("gamma")
        self.n_nodes = sec.getint("n_nodes")
        self.ell = sec.get("loss")
        self.n_mc = sec.getint("mc_samples")
        self.repeats = sec.getint("mc_repeats")
        self.target = self.solve(self.center[0], self.center[1])

    def schedule(self, w, b):
        return constant_schedule(w, b, self.t0, self.T, self.dt)

    def solve(self, w, b):
        return solve_meanfield(self.rho0, self.schedule(w, b), self.act)

    def loss_at(self, w, b, index):
        rho_T = self.solve(w, b)
        return loss_meanfield(
            rho_T, self.target, ell=self.ell, n_samples=self.n_mc, repeats=self.repeats,
            seed_key=rng_mod.derive_key(self.seed, rng_mod.MC_LOSS, index),
        )

    def loss_field(self, threads=1):
        nb = len(self.b_values)
        pts = [(w, b, i * nb + j) for i, w in enumerate(self.w_values)
               for j, b in enumerate(self.b_values)]
        vals = ordered_map(lambda p: self.loss_at(*p), pts, threads)
        means = np.array([v[0] for v in vals]).reshape(len(self.w_values), nb)
        errs = np.array([v[1] for v in vals]).reshape(len(self.w_values), nb)
        return means, errs


def run_mf_surface(cp, out_dir, threads=1):
    setup = _MeanfieldSetup(cp)
    field, stderr = setup.loss_field(threads)
    surr, nodes, node_values = _fit_on_grid(
        setup, field, rng_mod.derive(setup.seed, rng_mod.NODES)
    )
    grid = np.array([(w, b) for w in setup.w_values for b in setup.b_values])
    pred = surr.predict(grid)
    rel, rel_min, rel_max, skipped = relative_error_field(surr, field.reshape(-1), grid)
    node_pred = surr.predict(nodes)
    node_rel = float(np.max(np.abs(node_pred - node_values) / np.abs(node_values)))

    files = {}
    files["loss_true.csv"] = write_csv(
        os.path.join(out_dir, "loss_true.csv"), ["w", "b", "loss", "stderr"],
        [(w, b, field[i, j], stderr[i, j]) for i, w in enumerate(setup.w_values)
         for j, b in enumerate(setup.b_values)],
    )
    files["loss_surrogate.csv"] = write_csv(
        os.path.join(out_dir, "loss_surrogate.csv"), ["w", "b", "value"],
        [(grid[k, 0], grid[k, 1], pred[k]) for k in range(grid.shape[0])],
    )
    files["relerr.csv"] = write_csv(
        os.path.join(out_dir, "relerr.csv"), ["w", "b", "rel_err"],
        [(grid[k, 0], grid[k, 1], rel[k]) for k in range(grid.shape[0])],
    )
    files["nodes.csv"] = write_csv(
        os.path.join(out_dir, "nodes.csv"), ["w", "b", "value"],
        [(nodes[k, 0], nodes[k, 1], node_values[k]) for k in range(nodes.shape[0])],
    )
    files["surrogate.json"] = write_text(os.path.join(out_dir, "surrogate.json"), surr.to_json())
    nb = len(setup.b_values)
    files["loss_true.svg"] = svg_heatmap(
        os.path.join(out_dir, "loss_true.svg"), setup.w_values, setup.b_values, field,
        title="Monte-Carlo mean-field loss",
    )
    files["loss_surrogate.svg"] = svg_heatmap(
        os.path.join(out_dir, "loss_surrogate.svg"), setup.w_values, setup.b_values,
        pred.reshape(-1, nb), title="kernel surrogate",
    )
    files["relerr.svg"] = svg_heatmap(
        os.path.join(out_dir, "relerr.svg"), setup.w_values, setup.b_values,
        np.log10(np.maximum(rel.reshape(-1, nb), 1e-300)), title="log10 relative error",
    )
    metrics = {
        "center_w": float(setup.center[0]), "center_b": float(setup.center[1]),
        "node_rel_max": node_rel,
        "grid_rel_min": rel_min, "grid_rel_max": rel_max,
        "guard_skipped": skipped,
        "jitter": surr.jitter_,
        "rows": int(grid.shape[0]),
        "target_mass": setup.target.mass,
        "stderr_max": float(stderr.max()),
    }
    write_manifest(
        os.path.join(out_dir, "manifest.json"), config_echo(cp), files,
        extras={
            "node_placement": "corner-pinned stratified on-grid",
            "gaussian_convention": setup.convention,
            **metrics,
        },
        version=__version__,
    )
    return {"files": files, **metrics}


def run_mf_descent(cp, out_dir, threads=1):
    setup = _MeanfieldSetup(cp)
    sec = cp["meanfield"]
    field, stderr = setup.loss_field(threads)
    surr, _, _ = _fit_on_grid(setup, field, rng_mod.derive(setup.seed, rng_mod.NODES))
    argmin = np.unravel_index(int(np.argmin(field)), field.shape)
    grid_min = np.array([setup.w_values[argmin[0]], setup.b_values[argmin[1]]])
    start = _farthest_corner(setup.box, grid_min)
    trace = pgd(
        surr.predict_one, surr.gradient_one, start, setup.box,
        step=sec.getfloat("step"), max_iters=sec.getint("max_iters"),
        grad_tol=sec.getfloat("grad_tol"), step_tol=sec.getfloat("step_tol"),
    )
    final = trace.final
    rho_opt = setup.solve(final[0], final[1])
    rho_start = setup.solve(start[0], start[1])
    w1_opt = wasserstein1(rho_opt, setup.target)
    loss_opt, se_opt = loss_meanfield(
        rho_opt, setup.target, ell=setup.ell, n_samples=setup.n_mc, repeats=setup.repeats,
        seed_key=rng_mod.derive_key(setup.seed, rng_mod.MC_LOSS, 10_000),
    )

    files = {}
    files["trace.csv"] = write_csv(
        os.path.join(out_dir, "trace.csv"), ["iter", "w", "b", "objective"],
        [(k, trace.iterates[k, 0], trace.iterates[k, 1], trace.objectives[k])
         for k in range(trace.iterates.shape[0])],
    )
    x = setup.rho0.centers()
    files["densities.csv"] = write_csv(
        os.path.join(out_dir, "densities.csv"),
        ["x", "initial", "target", "start_params", "optimized"],
        [(x[k], setup.rho0.cells[k], setup.target.cells[k], rho_start.cells[k],
          rho_opt.cells[k]) for k in range(x.shape[0])],
    )
    files["densities.svg"] = svg_line_plot(
        os.path.join(out_dir, "densities.svg"), x,
        {
            "initial": setup.rho0.cells,
            "target": setup.target.cells,
            "optimized": rho_opt.cells,
        },
        title="densities at t0 and T", xlabel="x", ylabel="density",
    )
    files["objective.svg"] = svg_line_plot(
        os.path.join(out_dir, "objective.svg"),
        np.arange(trace.objectives.shape[0]), {"surrogate objective": trace.objectives},
        title="projected gradient descent", xlabel="iteration", ylabel="objective",
    )
    metrics = {
        "start_w": float(start[0]), "start_b": float(start[1]),
        "final_w": float(final[0]), "final_b": float(final[1]),
        "final_objective": float(trace.objectives[-1]),
        "w1_optimized_target": float(w1_opt),
        "loss_optimized": loss_opt,
        "loss_optimized_stderr": se_opt,
        "stop_reason": trace.stop_reason,
        "final_in_box": bool(setup.box.contains(final)),
    }
    write_manifest(
        os.path.join(out_dir, "manifest.json"), config_echo(cp), files,
        extras={
            "start_rule": "corner farthest from grid argmin",
            "gaussian_convention": setup.convention,
            **metrics,
        },
        version=__version__,
    )
    return {"files": files, **metrics}


# -- decay / control demos -----------------------------------------------------


def run_decay(cp, out_dir, threads=1):
    sec = cp["decay"]
    x0, y = sec.getfloat("x0"), sec.getfloat("y")
    t0, T, dt = sec.getfloat("t0"), sec.getfloat("T"), sec.getfloat("dt")
    omega = sec.getfloat("omega")
    panels = sec.getint("panels")
    curves = [
        ("a", "power", omega, 0.0),
        ("b", "power", omega, sec.getfloat("alpha_power")),
        ("c", "exp", omega, sec.getfloat("alpha_exp")),
    ]
    times = t0 + dt * np.arange(round((T - t0) / dt) + 1)
    closed = {}
    euler = {}
    biases = {}
    for label, case, om, al in curves:
        sched = (power_schedule if case == "power" else exp_schedule)(om, al, t0, T, dt)
        b = static_control(x0, y, sched).b
        biases[label] = b
        closed[label] = np.array(
            [closed_form_flow(case, om, al, b, x0, t, t0=t0, panels=panels) for t in times]
        )
        traj = _euler_scalar(x0, sched.with_bias(b))
        euler[label] = traj
    files = {}
    files["decay.csv"] = write_csv(
        os.path.join(out_dir, "decay.csv"), ["t", "phi_a", "phi_b", "phi_c"],
        [(times[k], closed["a"][k], closed["b"][k], closed["c"][k])
         for k in range(times.shape[0])],
    )
    files["decay_euler.csv"] = write_csv(
        os.path.join(out_dir, "decay_euler.csv"), ["t", "x_a", "x_b", "x_c"],
        [(times[k], euler["a"][k], euler["b"][k], euler["c"][k])
         for k in range(times.shape[0])],
    )
    files["decay.svg"] = svg_line_plot(
        os.path.join(out_dir, "decay.svg"), times,
        {
            "constant weight": closed["a"],
            "power weight": closed["b"],
            "exponential weight": closed["c"],
        },
        title="controlled decay toward the target", xlabel="t", ylabel="state",
    )
    threshold = 0.2
    crossings = {
        label: _first_crossing(times, np.abs(closed[label] - y), threshold)
        for label in ("a", "b", "c")
    }
    metrics = {
        "bias_a": biases["a"], "bias_b": biases["b"], "bias_c": biases["c"],
        "terminal_a": float(euler["a"][-1]), "terminal_b": float(euler["b"][-1]),
        "terminal_c": float(euler["c"][-1]),
        "closed_terminal_a": float(closed["a"][-1]),
        "closed_terminal_b": float(closed["b"][-1]),
        "closed_terminal_c": float(closed["c"][-1]),
        "crossing_a": crossings["a"], "crossing_b": crossings["b"], "crossing_c": crossings["c"],
    }
    write_manifest(
        os.path.join(out_dir, "manifest.json"), config_echo(cp), files,
        extras={"omega_for_all_curves": omega,
                "omega_assumption": "caption states omega only for the exponential case",
                **metrics},
        version=__version__,
    )
    return {"files": files, **metrics}


def _euler_scalar(x0, sched):
    """Scalar Euler trajectory under identity activation."""
    n = sched.n_steps
    traj = np.empty(n + 1)
    traj[0] = x0
    x = float(x0)
    for k in range(n):
        t = sched.t0 + k * sched.dt
        x = x + sched.dt * (sched.weight_at(t) * x + sched.bias_at(t))
        traj[k + 1] = x
    return traj


def _first_crossing(times, values, threshold):
    below = np.flatnonzero(values <= threshold)
    return float(times[below[0]]) if below.size else float("nan")


def run_hum_demo(cp, out_dir, threads=1):
    sec = cp["hum"]
    M, d = sec.getint("M"), sec.getint("d")
    w = config_floats(cp, "hum", "w")
    w = float(w[0]) if d == 1 else np.array(w).reshape(d, d)
    x0 = np.array(config_floats(cp, "hum", "x0")).reshape(-1)
    y = np.array(config_floats(cp, "hum", "y")).reshape(-1)
    if x0.size == 1 and M * d > 1:
        x0 = np.full(M * d, float(x0[0]))
    if y.size == 1 and M * d > 1:
        y = np.full(M * d, float(y[0]))
    t0, T, dt = sec.getfloat("t0"), sec.getfloat("T"), sec.getfloat("dt")
    sched = constant_schedule(w, None, t0, T, dt)
    result = hum_solve_terminal(sched, x0, y, d=d)
    times = sched.times()
    n = sched.n_steps
    # forward trajectory per particle under the shared nodal bias
    states = np.empty((n + 1, M, d))
    states[0] = x0.reshape(M, d)
    cur = x0.reshape(M, d).astype(float)
    for k in range(n):
        drift = (w * cur) if np.ndim(w) == 0 else cur @ np.asarray(w).T
        cur = cur + dt * (drift + result.bias[k])
        states[k + 1] = cur
    terminal_error = float(np.linalg.norm(states[-1].reshape(-1) - y))
    terms = duality_terms(sched, result.bias, result.lambdaT, d=d)
    gap = abs(terms.terminal_pairing - terms.quadrature)
    rel_gap = gap / terms.scale if terms.scale > 0 else 0.0

    header = ["t"]
    for i in range(M):
        for k in range(d):
            header.append(f"x_{i+1}" if d == 1 else f"x_{i+1}_{k+1}")
    for i in range(M):
        for k in range(d):
            header.append(f"costate_{i+1}" if d == 1 else f"costate_{i+1}_{k+1}")
    header += [f"bias_{k+1}" if d > 1 else "bias" for k in range(d)]
    rows = []
    lam = result.adjoint.costates
    for k in range(n + 1):
        row = [times[k]]
        row += list(states[k].reshape(-1))
        row += list(lam[k].reshape(-1))
        row += list(np.atleast_1d(result.bias[k]))
        rows.append(row)
    files = {}
    files["hum.csv"] = write_csv(os.path.join(out_dir, "hum.csv"), header, rows)
    files["hum.svg"] = svg_line_plot(
        os.path.join(out_dir, "hum.svg"), times,
        {"state": states[:, 0, 0], "costate": lam[:, 0, 0], "bias": result.bias[:, 0]},
        title="exact bias control of the linear dynamics", xlabel="t", ylabel="value",
    )
    metrics = {
        "terminal_error": terminal_error,
        "duality_gap": float(gap),
        "duality_gap_rel": float(rel_gap),
        "gramian_cond": result.cond,
    }
    write_manifest(
        os.path.join(out_dir, "manifest.json"), config_echo(cp), files,
        extras=metrics, version=__version__,
    )
    return {"files": files, **metrics}


def run_static_control_demo(cp, out_dir, threads=1):
    sec = cp["static"]
    x0, y = sec.getfloat("x0"), sec.getfloat("y")
    t0, T = sec.getfloat("t0"), sec.getfloat("T")
    weights = config_floats(cp, "static", "weights")
    dts = config_floats(cp, "static", "dts")
    rows = []
    for w in weights:
        for dt in dts:
            sched = constant_schedule(w, None, t0, T, dt)
            res = static_control(x0, y, sched)
            traj = _euler_scalar(x0, sched.with_bias(res.b))
            rows.append((w, dt, res.b, res.c1T, res.c2T, abs(traj[-1] - y)))
    files = {}
    files["static_control.csv"] = write_csv(
        os.path.join(out_dir, "static_control.csv"),
        ["w", "dt", "b", "c1T", "c2T", "abs_err"], rows,
    )
    metrics = {"rows": len(rows)}
    write_manifest(
        os.path.join(out_dir, "manifest.json"), config_echo(cp), files,
        extras=metrics, version=__version__,
    )
    return {"files": files, **metrics}


def run_particle_pde_consistency(cp, out_dir, threads=1):
    setup = _MeanfieldSetup(cp)
    sec = cp["consistency"]
    counts = [int(c) for c in config_floats(cp, "consistency", "counts")]
    repeats = sec.getint("repeats")
    sched = setup.schedule(setup.center[0], setup.center[1])
    rows = []
    stats = {}
    for ci, n in enumerate(counts):
        vals = []
        for r in range(repeats):
            rng = rng_mod.derive(setup.seed, rng_mod.PARTICLES, ci, r)
            cloud = push_forward_particles(n, setup.rho0, sched, setup.act, rng)
            vals.append(wasserstein1(cloud, setup.target))
        vals = np.array(vals)
        se = float(vals.std(ddof=1) / np.sqrt(repeats)) if repeats > 1 else 0.0
        rows.append((n, float(vals.mean()), se, repeats))
        stats[n] = (float(vals.mean()), se)
    files = {}
    files["w1_vs_n.csv"] = write_csv(
        os.path.join(out_dir, "w1_vs_n.csv"), ["n", "w1_mean", "w1_stderr", "repeats"], rows,
    )
    files["w1_vs_n.svg"] = svg_line_plot(
        os.path.join(out_dir, "w1_vs_n.svg"),
        np.log10([r[0] for r in rows]), {"W1": [r[1] for r in rows]},
        title="particle vs grid solution", xlabel="log10 n", ylabel="W1",
    )
    metrics = {f"w1_n{n}": stats[n][0] for n in counts}
    metrics.update({f"stderr_n{n}": stats[n][1] for n in counts})
    write_manifest(
        os.path.join(out_dir, "manifest.json"), config_echo(cp), files,
        extras={"gaussian_convention": setup.convention, **metrics}, version=__version__,
    )
    return {"files": files, **metrics}
