"""Independent verification that the closed-form star weights are optimal.

Three routes:

* complementary-slackness residuals: the dual certificate of the
  semidefinite program reduces to Chebyshev-type recursions in the
  coordinates a_i, b_i; at the closed-form weights and the characteristic
  angle every residual must vanish,
* a general numerical SLEM minimizer (projected subgradient on the
  extreme eigenvalues), usable on arbitrary connected graphs with
  optional weight tying by symmetry class,
* invariance experiments: the optimal central weights 2/(2+n) (star
  center) and 1/n (complete core) persist when path branches are
  replaced by arbitrary branch graphs.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .topology import CcsStar, Graph, KcsStar, SymmetricStar, Topology, build
from .spectral import (
    SpectralError,
    eig_symmetric,
    k_max,
    slem_closed_form,
    stratify,
    theta_root_symmetric,
)
from .weights import WeightAssignment, metropolis_weights, optimal_weights

__all__ = [
    "SlacknessReport",
    "OptimizeResult",
    "InvarianceReport",
    "slackness_residuals",
    "minimize_slem",
    "kcs_slem_curve",
    "central_weight_invariance",
]


@dataclass(frozen=True)
class SlacknessReport:
    """Residuals of the dual-certificate conditions at the closed-form
    optimum of a symmetric star."""

    m: int
    n: int
    theta: float
    s: float
    a_coords: np.ndarray
    b_coords: np.ndarray
    residuals: dict[str, float]

    def max_residual(self) -> float:
        return max(self.residuals.values())


def _alpha_vectors(m: int) -> list[np.ndarray]:
    vecs = []
    a1 = np.zeros(m)
    a1[0] = -1.0
    vecs.append(a1)
    for i in range(2, m + 1):
        v = np.zeros(m)
        v[i - 2] = 1.0
        v[i - 1] = -1.0
        vecs.append(v)
    return vecs


def _beta_vectors(m: int, n: int) -> list[np.ndarray]:
    vecs = []
    b1 = np.zeros(m + 1)
    b1[0] = math.sqrt(n)
    b1[1] = -1.0
    vecs.append(b1)
    for i in range(2, m + 1):
        v = np.zeros(m + 1)
        v[i - 1] = 1.0
        v[i] = -1.0
        vecs.append(v)
    return vecs


def slackness_residuals(m: int, n: int) -> SlacknessReport:
    """Evaluate every slackness condition at the closed-form optimum.

    Coordinates are a_i = sin((m-i+1)t)/sin(t) and
    b_i = sin((m-i+1)(pi-t))/sin(pi-t), normalized so a_m = b_m = 1.
    The recursions in a alone and in b alone are homogeneous, so that
    normalization is free.  The squared-projection identity couples the
    two scales; it holds after rescaling b by (1-s)/(1+s), which is the
    relative scale the stationarity conditions force (both reported
    residuals use that scale).  The printed recursions and the direct
    matrix equations (s I - W1) z1 = 0, (s I + W0) z2 = 0 are reported
    separately; at these weights they agree.
    """
    if m < 1 or n < 1:
        raise ValueError("m, n must be >= 1")
    theta = theta_root_symmetric(m, n)
    s = math.cos(theta)
    if abs(math.sin(theta)) < 1e-12:
        raise SpectralError("degenerate characteristic angle (sin ~ 0)")

    idx = np.arange(1, m + 1)
    a = np.sin((m - idx + 1) * theta) / math.sin(theta)
    b = np.sin((m - idx + 1) * (math.pi - theta)) / math.sin(math.pi - theta)
    w = np.full(m, 0.5)
    w[0] = 2.0 / (n + 2)

    res: dict[str, float] = {}

    # printed recursions; the a-set uses i = 1..m, the b-set likewise
    r25 = []
    r26 = []
    r25.append((1 - s) * a[0] - w[0] * (a[0] - a[1]) if m > 1
               else (1 - s) * a[0] - w[0] * a[0])
    r26.append((1 + s) * b[0] - w[0] * ((n + 1) * b[0] - b[1]) if m > 1
               else (1 + s) * b[0] - w[0] * (n + 1) * b[0])
    for i in range(1, m - 1):
        r25.append((1 - s) * a[i] - w[i] * (-a[i - 1] + 2 * a[i] - a[i + 1]))
        r26.append((1 + s) * b[i] - w[i] * (-b[i - 1] + 2 * b[i] - b[i + 1]))
    if m > 1:
        r25.append((1 - s) * a[m - 1] - w[m - 1] * (-a[m - 2] + 2 * a[m - 1]))
        r26.append((1 + s) * b[m - 1] - w[m - 1] * (-b[m - 2] + 2 * b[m - 1]))
    res["eq25_a"] = abs(r25[0])
    res["eq25_b"] = max((abs(x) for x in r25[1:m - 1]), default=0.0)
    res["eq25_c"] = abs(r25[-1]) if m > 1 else 0.0
    res["eq26_a"] = abs(r26[0])
    res["eq26_b"] = max((abs(x) for x in r26[1:m - 1]), default=0.0)
    res["eq26_c"] = abs(r26[-1]) if m > 1 else 0.0

    # dual-certificate vectors and the direct matrix equations
    alphas = _alpha_vectors(m)
    betas = _beta_vectors(m, n)
    z1 = sum(a[i] * alphas[i] for i in range(m))
    sigma = (1 - s) / (1 + s)  # relative dual scale forced by stationarity
    z2 = sigma * sum(b[i] * betas[i] for i in range(m))

    proj_a = np.array([alphas[i] @ z1 for i in range(m)])
    proj_b = np.array([betas[i] @ z2 for i in range(m)])
    res["eq19"] = float(np.max(np.abs(proj_a**2 - proj_b**2)))

    # scale-free ratio condition (a_i/a_j)^2 = (b_i/b_j)^2, cleared of
    # denominators: (a_i b_j)^2 - (a_j b_i)^2 = 0
    r23 = 0.0
    for i in range(m):
        for j in range(m):
            r23 = max(r23, abs((a[i] * b[j]) ** 2 - (a[j] * b[i]) ** 2))
    res["eq23"] = r23

    blocks = stratify(SymmetricStar(m, n),
                      WeightAssignment(per_stratum={j + 1: w[j] for j in range(m)}))
    res["matrix_w1"] = float(np.max(np.abs(s * z1 - blocks.w1_block @ z1)))
    res["matrix_w0"] = float(np.max(np.abs(s * z2 + blocks.w0_block @ z2)))

    return SlacknessReport(m=m, n=n, theta=theta, s=s, a_coords=a, b_coords=b,
                           residuals=res)


@dataclass
class OptimizeResult:
    """Outcome of the numerical SLEM minimization."""

    class_weights: dict
    per_edge: dict[tuple[int, int], float]
    slem: float
    iterations: int
    converged: bool
    history: list[float] = field(repr=False, default_factory=list)

    @property
    def weights(self) -> WeightAssignment:
        return WeightAssignment(per_edge=dict(self.per_edge))

    def history_to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("iteration,best_slem\n")
        for i, v in enumerate(self.history):
            buf.write(f"{i},{v:.17g}\n")
        return buf.getvalue()


def minimize_slem(graph: Graph,
                  symmetry_classes: dict[tuple[int, int], object] | None = None,
                  max_iters: int = 5000,
                  step_scale: float = 0.1,
                  tie_tol: float = 1e-12) -> OptimizeResult:
    """Subgradient minimization of max(lam_2, -lam_N) over edge weights.

    Weights sharing a symmetry class are tied to a single variable.
    Initialization is the Metropolis scheme (class average); the step is
    step_scale/sqrt(t).  When the top and bottom eigenvalues tie within
    tie_tol the two subgradients are averaged.  A derivative-free polish
    (Nelder-Mead on the class weights) refines the subgradient answer;
    both stages are deterministic, so identical inputs give identical
    results.
    """
    if not graph.is_connected():
        raise ValueError("SLEM minimization requires a connected graph")
    N = graph.node_count
    edges = list(graph.edges)
    if symmetry_classes is None:
        classes = {e: e for e in edges}
    else:
        classes = {(min(e), max(e)): symmetry_classes[(min(e), max(e))] for e in edges}
    labels = sorted(set(classes.values()), key=repr)
    lab_index = {c: i for i, c in enumerate(labels)}
    edge_class = np.array([lab_index[classes[e]] for e in edges])

    # class incidence: W(w) = I - sum_c w_c * L_c
    u_idx = np.array([e[0] for e in edges])
    v_idx = np.array([e[1] for e in edges])

    W_met = metropolis_weights(graph)
    w = np.zeros(len(labels))
    cnt = np.zeros(len(labels))
    for e, ci in zip(edges, edge_class):
        w[ci] += W_met[e[0], e[1]]
        cnt[ci] += 1
    w /= cnt

    ones_shift = np.ones((N, N)) / N

    def build_W(wvec):
        W = np.zeros((N, N))
        W[u_idx, v_idx] = wvec[edge_class]
        W += W.T
        np.fill_diagonal(W, 1.0 - W.sum(axis=1))
        return W

    def eval_f(wvec):
        W = build_W(wvec)
        lam, vec = np.linalg.eigh(W - ones_shift)
        top, bot = lam[-1], lam[0]
        grads = []
        if top >= -bot - tie_tol:
            u = vec[:, -1]
            g = np.zeros(len(labels))
            np.add.at(g, edge_class, -(u[u_idx] - u[v_idx]) ** 2)
            grads.append(g)
        if -bot >= top - tie_tol:
            u = vec[:, 0]
            g = np.zeros(len(labels))
            np.add.at(g, edge_class, (u[u_idx] - u[v_idx]) ** 2)
            grads.append(g)
        return max(top, -bot), sum(grads) / len(grads)

    best_w = w.copy()
    best_f, _ = eval_f(w)
    history = [best_f]
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        f, g = eval_f(w)
        if f < best_f:
            best_f = f
            best_w = w.copy()
        history.append(best_f)
        gn = np.linalg.norm(g)
        if gn < 1e-14:
            converged = True
            break
        w = w - (step_scale / math.sqrt(it)) * g
        if it >= 1000 and history[-1000] - history[-1] < 1e-10:
            converged = True
            break

    from scipy.optimize import minimize as _nm_minimize

    polish = _nm_minimize(lambda v: eval_f(v)[0], best_w, method="Nelder-Mead",
                          options={"xatol": 1e-10, "fatol": 1e-12,
                                   "maxiter": 200 * len(labels), "disp": False})
    if polish.fun < best_f:
        best_f = float(polish.fun)
        best_w = np.asarray(polish.x, dtype=float)
        history.append(best_f)

    per_edge = {e: float(best_w[ci]) for e, ci in zip(edges, edge_class)}
    class_weights = {labels[i]: float(best_w[i]) for i in range(len(labels))}
    return OptimizeResult(class_weights=class_weights, per_edge=per_edge,
                          slem=float(best_f), iterations=it,
                          converged=converged, history=history)


def kcs_slem_curve(n: int, m: int, k_range) -> list[tuple[int, float]]:
    """Optimal SLEM of the k-cored star versus k.

    Within the closed-form validity range the characteristic-equation
    value is used; beyond it the weights are re-optimized numerically
    with per-stratum tying.
    """
    km = k_max(m, n)
    out = []
    for k in k_range:
        if k < 1:
            raise ValueError("k must be >= 1")
        if k <= km:
            out.append((k, slem_closed_form(KcsStar(m, n, k))))
        else:
            g = build(KcsStar(m, n, k))
            res = minimize_slem(g, symmetry_classes=dict(g.stratum_of_edge))
            out.append((k, res.slem))
    return out


@dataclass(frozen=True)
class InvarianceReport:
    core: str
    branch_count: int
    recovered_central_weight: float
    closed_form_weight: float
    deviation: float
    slem: float


def _compose(core: str, branches: list[tuple[Graph, int]]) -> tuple[Graph, dict, object]:
    """Attach branch graphs to a star center or a complete core.

    Returns (graph, symmetry classes, central class label).  For the star
    core a fresh central node 0 links to each branch's attachment node;
    for the complete core the attachment nodes are pairwise connected.
    Central edges share one class; every other edge is its own class.
    """
    edges: list[tuple[int, int]] = []
    classes: dict[tuple[int, int], object] = {}
    central = "central"
    if core == "star":
        offset = 1
        attach_global = []
        for bi, (g, attach) in enumerate(branches):
            for u, v in g.edges:
                e = (u + offset, v + offset)
                edges.append(e)
                classes[e] = ("branch", bi, u, v)
            attach_global.append(attach + offset)
            offset += g.node_count
        for a in attach_global:
            e = (0, a)
            edges.append(e)
            classes[e] = central
        return Graph(offset, tuple(edges)), classes, central
    if core == "complete":
        offset = 0
        attach_global = []
        for bi, (g, attach) in enumerate(branches):
            for u, v in g.edges:
                e = (u + offset, v + offset)
                edges.append(e)
                classes[e] = ("branch", bi, u, v)
            attach_global.append(attach + offset)
            offset += g.node_count
        for i in range(len(attach_global)):
            for j in range(i + 1, len(attach_global)):
                e = (min(attach_global[i], attach_global[j]),
                     max(attach_global[i], attach_global[j]))
                edges.append(e)
                classes[e] = central
        return Graph(offset, tuple(edges)), classes, central
    raise ValueError("core must be 'star' or 'complete'")


def central_weight_invariance(core: str,
                              branch_graphs: list[tuple[Graph, int]],
                              max_iters: int = 5000) -> InvarianceReport:
    """Numerically optimize a composite topology and compare the central
    weight with the branch-independent closed form.

    ``branch_graphs`` is a list of (graph, attachment node index) pairs;
    each branch graph must be connected.
    """
    n = len(branch_graphs)
    for g, attach in branch_graphs:
        if not g.is_connected():
            raise ValueError("branch graphs must be connected")
        if not (0 <= attach < g.node_count):
            raise ValueError("attachment node out of range")
    graph, classes, central = _compose(core, branch_graphs)
    res = minimize_slem(graph, symmetry_classes=classes, max_iters=max_iters)
    closed = 2.0 / (2 + n) if core == "star" else 1.0 / n
    got = res.class_weights[central]
    return InvarianceReport(core=core, branch_count=n,
                            recovered_central_weight=got,
                            closed_form_weight=closed,
                            deviation=abs(got - closed),
                            slem=res.slem)


def report_to_json(report: SlacknessReport) -> str:
    return json.dumps({
        "m": report.m, "n": report.n, "theta": report.theta, "s": report.s,
        "a": list(map(float, report.a_coords)),
        "b": list(map(float, report.b_coords)),
        "residuals": report.residuals,
    }, indent=2)
