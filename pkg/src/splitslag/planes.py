"""Real n-planes in D^n = R^{2n}: space-like / Lagrangian / split SLAG
predicates, phases, canonical angles and graph-matrix tests.

Vectors are ordered (x_1..x_n, y_1..y_n).  The inner product is
<a, b> = sum x x' - sum y y' (matrix Jm), the symplectic form is
omega(a, b) = sum (x_j y'_j - y_j x'_j) (matrix Om), and T swaps the x and
y blocks (multiplication by tau).  One checks <a, T b> = omega(a, b).
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Optional

import numpy as np

from . import forms
from .dmat import DMatrix, det_d, from_gl
from .dnum import DNumber, classify, default_tol, polar


def metric(n: int) -> np.ndarray:
    return np.diag(np.r_[np.ones(n), -np.ones(n)])


def tau_matrix(n: int) -> np.ndarray:
    I = np.eye(n)
    Z = np.zeros((n, n))
    return np.block([[Z, I], [I, Z]])


def omega_matrix(n: int) -> np.ndarray:
    I = np.eye(n)
    Z = np.zeros((n, n))
    return np.block([[Z, I], [-I, Z]])


def inner(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = a.size // 2
    return float(a[:n] @ b[:n] - a[n:] @ b[n:])


@dataclass(frozen=True)
class PlaneBasis:
    columns: np.ndarray  # shape (2n, n)

    def __post_init__(self):
        P = np.array(self.columns, dtype=float)
        if P.ndim != 2 or P.shape[0] != 2 * P.shape[1]:
            raise ValueError(f"a plane basis is a 2n x n array, got shape {P.shape}")
        object.__setattr__(self, "columns", P)

    @property
    def n(self) -> int:
        return self.columns.shape[1]

    @classmethod
    def standard(cls, n: int) -> "PlaneBasis":
        return cls(np.vstack([np.eye(n), np.zeros((n, n))]))

    @classmethod
    def from_vectors(cls, vectors) -> "PlaneBasis":
        """Build from a list of basis vectors (each of length 2n)."""
        return cls(np.asarray(vectors, dtype=float).T)

    def to_dmatrix(self) -> DMatrix:
        n = self.n
        return DMatrix(self.columns[:n], self.columns[n:])

    def to_json(self) -> dict:
        return {"n": self.n, "columns": self.columns.T.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "PlaneBasis":
        P = cls.from_vectors(data["columns"])
        if "n" in data and int(data["n"]) != P.n:
            raise ValueError(f"declared n={data['n']} but columns give n={P.n}")
        return P


def gram(P) -> np.ndarray:
    P = _cols(P)
    n = P.shape[1]
    return P.T @ metric(n) @ P


def _cols(P) -> np.ndarray:
    return P.columns if isinstance(P, PlaneBasis) else np.asarray(P, dtype=float)


def orthonormalize(P) -> np.ndarray:
    """Columns P L^{-T} with G = L L^T; orientation is preserved."""
    P = _cols(P)
    G = gram(P)
    try:
        L = np.linalg.cholesky(G)
    except np.linalg.LinAlgError as exc:
        raise ValueError("plane is not space-like") from exc
    return np.linalg.solve(L, P.T).T


def dz_of(P) -> DNumber:
    """dz on the given columns (no normalization): det_D(X + tau Y)."""
    P = _cols(P)
    n = P.shape[1]
    return det_d(DMatrix(P[:n], P[n:]))


# ---------------------------------------------------------------------------
# batched core, used by analyze_plane and by surface reports

def _batched(F: np.ndarray, tol: float) -> dict:
    """Pointwise predicates for a stack of frames F of shape (m, 2n, n)."""
    F = np.asarray(F, dtype=float)
    m, d, n = F.shape
    Jm = metric(n)
    Om = omega_matrix(n)

    # Euclidean-orthonormal frames: residuals comparable across nodes
    Q, R = np.linalg.qr(F)
    rdiag = np.abs(np.diagonal(R, axis1=1, axis2=2))
    scale = np.maximum(rdiag.max(axis=1), 1e-300)
    rank_ok = rdiag.min(axis=1) > 1e-10 * scale
    # keep the orientation of F
    sgn = np.sign(np.prod(np.sign(np.diagonal(R, axis1=1, axis2=2)), axis=1))
    sgn[sgn == 0] = 1.0
    Q = Q.copy()
    Q[:, :, 0] *= sgn[:, None]

    GQ = np.einsum("mik,ij,mjl->mkl", Q, Jm, Q)
    eigQ = np.linalg.eigvalsh(GQ)
    margin = eigQ[:, 0]
    degenerate = np.abs(eigQ).min(axis=1) <= tol
    spacelike = (margin > tol) & rank_ok

    SQ = np.einsum("mik,ij,mjl->mkl", Q, Om, Q)
    omega_res = np.abs(SQ).max(axis=(1, 2)) if n > 1 else np.zeros(m)

    X, Y = Q[:, :n, :], Q[:, n:, :]
    uq = np.linalg.det(X - Y)
    vq = np.linalg.det(X + Y)
    re_q, im_q = 0.5 * (uq + vq), 0.5 * (vq - uq)

    # Gram-orthonormal frames for the space-like nodes
    G = np.einsum("mik,ij,mjl->mkl", F, Jm, F)
    dz_u = np.full(m, np.nan)
    dz_v = np.full(m, np.nan)
    S_max = np.full(m, np.nan)
    if spacelike.any():
        idx = np.nonzero(spacelike)[0]
        L = np.linalg.cholesky(G[idx])
        E = np.linalg.solve(L, np.transpose(F[idx], (0, 2, 1)))
        E = np.transpose(E, (0, 2, 1))
        Xe, Ye = E[:, :n, :], E[:, n:, :]
        dz_u[idx] = np.linalg.det(Xe - Ye)
        dz_v[idx] = np.linalg.det(Xe + Ye)
        Se = np.einsum("mik,ij,mjl->mkl", E, Om, E)
        S_max[idx] = np.abs(Se).max(axis=(1, 2)) if n > 1 else 0.0

    posdet = np.linalg.det(F[:, :n, :])
    return {
        "rank_ok": rank_ok,
        "margin": margin,
        "degenerate": degenerate,
        "spacelike": spacelike,
        "omega_residual": omega_res,
        "re_dz_unit": re_q,
        "im_dz_unit": im_q,
        "dz_u": dz_u,
        "dz_v": dz_v,
        "omega_residual_gram": S_max,
        "x_det": posdet,
        "gram": G,
    }


def slag_tol(eq_tol: float) -> float:
    """Tolerance on omega and Im dz paired with the equality test Re dz <= 1 + eq_tol.

    Near a split SLAG plane Re dz - 1 is quadratic in the canonical angles and
    the phase, so eq_tol on Re dz corresponds to sqrt(2 eq_tol) on them.
    """
    return math.sqrt(2.0 * eq_tol)


@dataclass
class PlaneReport:
    n: int
    gram: np.ndarray
    degenerate: bool
    spacelike: Optional[bool]
    positive_component: Optional[bool]
    lagrangian: Optional[bool]
    dz: Optional[DNumber]
    dz_oracle: Optional[DNumber]
    slag: Optional[bool]
    slag_theta: Optional[float]
    spacelike_margin: float
    omega_residual: float
    im_dz_residual: Optional[float]
    dz_route_gap: Optional[float] = None

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "gram": self.gram.tolist(),
            "degenerate": self.degenerate,
            "spacelike": self.spacelike,
            "positive_component": self.positive_component,
            "lagrangian": self.lagrangian,
            "slag": self.slag,
            "dz": None if self.dz is None else self.dz.to_json(),
            "dz_oracle": None if self.dz_oracle is None else self.dz_oracle.to_json(),
            "dz_route_gap": self.dz_route_gap,
            "slag_theta": self.slag_theta,
            "residuals": {
                "spacelike_margin": self.spacelike_margin,
                "omega": self.omega_residual,
                "im_dz": self.im_dz_residual,
            },
        }


def analyze_plane(P, tol: Optional[float] = None, lag_tol: Optional[float] = None) -> PlaneReport:
    """Classify a plane.  tol is used for the Gram tests and (unless lag_tol is
    given) for the omega and Im dz tests."""
    t = default_tol(tol)
    lt = t if lag_tol is None else float(lag_tol)
    P = _cols(P)
    n = P.shape[1]
    b = _batched(P[None], t)
    if not b["rank_ok"][0]:
        raise ValueError("columns are linearly dependent")
    G = b["gram"][0]
    eig = np.linalg.eigvalsh(G)
    if np.abs(eig).min() <= t * max(1.0, np.abs(eig).max()):
        return PlaneReport(n, G, True, None, None, None, None, None, None, None,
                           float(b["margin"][0]), float(b["omega_residual"][0]), None)

    spacelike = bool(eig[0] > 0)
    if not spacelike:
        lag = bool(b["omega_residual"][0] <= lt)
        return PlaneReport(n, G, False, False, None, lag, None, None, False, None,
                           float(b["margin"][0]), float(b["omega_residual"][0]),
                           float(abs(b["im_dz_unit"][0])))

    E = orthonormalize(P)
    xdet = np.linalg.det(E[:n])
    # space-like planes are graphs over R^n, so the x-block is invertible
    assert abs(xdet) > 1e-12, "space-like plane with singular x-projection"
    positive = bool(xdet > 0)
    dz = dz_of(E)
    oracle = forms.eval_dz_oracle(E) if n <= 3 else None
    gap = None if oracle is None else max(abs(dz.re - oracle.re), abs(dz.im - oracle.im))
    S = E.T @ omega_matrix(n) @ E
    om = float(np.abs(S).max())
    lag = om <= lt
    slag = bool(positive and lag and abs(dz.im) <= lt)
    pol = polar(dz)
    theta = None if pol is None else float(pol[1])
    return PlaneReport(n, G, False, True, positive, bool(lag), dz, oracle, slag, theta,
                       float(b["margin"][0]), om, float(abs(dz.im)), gap)


# ---------------------------------------------------------------------------
# canonical form

@dataclass
class CanonicalData:
    phase: float
    angles: list
    lambdas: list
    dz_value: DNumber

    def reconstruction_residuals(self) -> tuple:
        q = float(np.prod([1.0 + l * l for l in self.lambdas])) if self.lambdas else 1.0
        r = math.cosh(self.phase) * float(np.prod([math.cosh(a) for a in self.angles]) if self.angles else 1.0)
        return abs(self.dz_value.quad() - q), abs(self.dz_value.re - r)

    def to_json(self) -> dict:
        return {"phase": self.phase, "angles": list(self.angles), "lambdas": list(self.lambdas),
                "dz": self.dz_value.to_json()}


def skew_pairs(S: np.ndarray) -> np.ndarray:
    """Canonical values lambda_1 >= .. of a real skew matrix (paired singular values)."""
    n = S.shape[0]
    sv = np.linalg.svd(S, compute_uv=False)
    k = n // 2
    return np.array([0.5 * (sv[2 * j] + sv[2 * j + 1]) for j in range(k)])


def canonical_angles(P) -> CanonicalData:
    P = _cols(P)
    n = P.shape[1]
    if np.linalg.eigvalsh(gram(P))[0] <= 0:
        raise ValueError("plane is not space-like")
    E = orthonormalize(P)
    if np.linalg.det(E[:n]) <= 0:
        raise ValueError("plane is not in the positive component")
    S = E.T @ omega_matrix(n) @ E
    lam = skew_pairs(S)
    dz = dz_of(E)
    pol = polar(dz)
    if pol is None:
        raise ValueError(f"dz = {dz!r} is not in D+")
    return CanonicalData(float(pol[1]), [float(math.asinh(l)) for l in lam],
                         [float(l) for l in lam], dz)


def canonical_plane(angles, n: int) -> np.ndarray:
    """Columns e_1, cosh t_1 e_2 + sinh t_1 T e_1, e_3, ... (0-based pairs)."""
    angles = list(angles)
    if len(angles) > n // 2:
        raise ValueError(f"at most {n // 2} canonical angles for n = {n}")
    P = np.vstack([np.eye(n), np.zeros((n, n))])
    for j, t in enumerate(angles):
        a, b = 2 * j, 2 * j + 1
        col = np.zeros(2 * n)
        col[b] = math.cosh(t)
        col[n + a] = math.sinh(t)  # T e_a is the y_a axis
        P[:, b] = col
    return P


def random_gl_plus(n: int, rng: np.random.Generator, spread: float = 1.0,
                   det: Optional[float] = None) -> np.ndarray:
    """Random B with singular values in [e^-spread, e^spread] and det B > 0.

    If det is given, B is rescaled to have that determinant."""
    Q1, _ = np.linalg.qr(rng.standard_normal((n, n)))
    Q2, _ = np.linalg.qr(rng.standard_normal((n, n)))
    s = np.exp(rng.uniform(-spread, spread, n))
    B = Q1 @ np.diag(s) @ Q2
    if np.linalg.det(B) < 0:
        B[:, 0] = -B[:, 0]
    if det is not None:
        B = B * (det / np.linalg.det(B)) ** (1.0 / n)
    return B


def unitary_with_phase(n: int, rng: np.random.Generator, phase: float) -> DMatrix:
    """from_gl(B) with det_D = exp(tau*phase), i.e. det B = exp(-phase)."""
    return from_gl(random_gl_plus(n, rng, det=math.exp(-phase)))


STRATA = ("generic", "lagrangian", "unit_det", "slag")


def sample_plane(n: int, rng: np.random.Generator, stratum: str = "generic") -> tuple:
    """A random space-like positive plane and its seeded (angles, phase).

    generic: angles uniform on [0, 2] and phase uniform on [-2, 2];
    lagrangian: angles 0; unit_det: phase 0; slag: both 0.
    The basis is then mixed by a random element of GL+(n, R) on the right."""
    k = n // 2
    angles = np.sort(rng.uniform(0.0, 2.0, k))[::-1]
    phase = rng.uniform(-2.0, 2.0)
    if stratum in ("lagrangian", "slag"):
        angles = np.zeros(k)
    if stratum in ("unit_det", "slag"):
        phase = 0.0
    if stratum not in STRATA:
        raise ValueError(f"unknown stratum {stratum!r}")
    A = unitary_with_phase(n, rng, phase)
    P = A.apply_real(canonical_plane(angles, n))
    P = P @ random_gl_plus(n, rng, spread=0.5)
    return P, angles, phase


# ---------------------------------------------------------------------------
# graph matrices and the Cayley transform

@dataclass
class GraphMatrix:
    picture: str  # "x" (y = A x) or "null" (v = B u)
    matrix: np.ndarray

    def __post_init__(self):
        if self.picture not in ("x", "null"):
            raise ValueError("picture must be 'x' or 'null'")
        M = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if M.shape[0] != M.shape[1]:
            raise ValueError("graph matrix must be square")
        self.matrix = M

    def plane(self) -> np.ndarray:
        """A basis of the graph, positively oriented over its base plane."""
        A = self.matrix
        n = A.shape[0]
        I = np.eye(n)
        if self.picture == "x":
            return np.vstack([I, A])
        # v = B u with x = (u + v)/2, y = (v - u)/2
        return np.vstack([0.5 * (I + A), 0.5 * (A - I)])


def im_det_x(A: np.ndarray) -> float:
    """Im det_D(I + tau A) = (det(I + A) - det(I - A))/2."""
    n = A.shape[0]
    I = np.eye(n)
    return 0.5 * (np.linalg.det(I + A) - np.linalg.det(I - A))


@dataclass
class GraphTestReport:
    spacelike: bool
    lagrangian: bool
    slag: bool
    witnesses: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"spacelike": self.spacelike, "lagrangian": self.lagrangian,
                "slag": self.slag, "witnesses": self.witnesses}


def graph_tests(G: GraphMatrix, tol: Optional[float] = None) -> GraphTestReport:
    t = default_tol(tol)
    A = G.matrix
    n = A.shape[0]
    I = np.eye(n)
    asym = float(np.abs(A - A.T).max())
    lag = asym <= t
    w = {"asymmetry": asym}
    if G.picture == "x":
        lam = float(np.linalg.eigvalsh(I - A.T @ A)[0])
        space = lam > t
        w["min_eig_I_minus_AtA"] = lam
        res = im_det_x(A)
        w["im_det"] = float(res)
        slag = False
        if lag:
            ev = np.linalg.eigvalsh(0.5 * (A + A.T))
            inside = bool(ev[0] > -1 + t and ev[-1] < 1 - t)
            w["spectrum"] = [float(ev[0]), float(ev[-1])]
            slag = inside and abs(res) <= t
    else:
        lam = float(np.linalg.eigvalsh(A + A.T)[0])
        space = lam > t
        w["min_eig_A_plus_At"] = lam
        dres = float(np.linalg.det(A) - 1.0)
        w["det_minus_one"] = dres
        slag = bool(lag and space and abs(dres) <= t)
    return GraphTestReport(bool(space), bool(lag), bool(slag), w)


def cayley_graph(A) -> np.ndarray:
    """x-picture A -> null-picture B = (I + A)(I - A)^-1."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    I = np.eye(A.shape[0])
    if np.linalg.cond(I - A) > 1e13:
        raise ValueError("graph not expressible over null plane")
    return (I + A) @ np.linalg.inv(I - A)


def cayley_inverse(B) -> np.ndarray:
    """null-picture B -> x-picture A = (B - I)(B + I)^-1."""
    B = np.atleast_2d(np.asarray(B, dtype=float))
    I = np.eye(B.shape[0])
    if np.linalg.cond(B + I) > 1e13:
        raise ValueError("graph not expressible over the x-plane")
    return (B - I) @ np.linalg.inv(B + I)


# ---------------------------------------------------------------------------
# mixed signature phase, point calibration, null decomposition

@dataclass
class PhaseReport:
    signature: tuple
    theta: float
    sign: int

    def to_json(self) -> dict:
        return {"signature": list(self.signature), "theta": self.theta, "sign": self.sign}


def pseudo_orthonormalize(P, tol: Optional[float] = None) -> tuple:
    """Basis with <e_j, e_j> = +-1, same orientation as P; returns (E, p, q)."""
    t = default_tol(tol)
    P = _cols(P)
    G = gram(P)
    w, V = np.linalg.eigh(G)
    if np.abs(w).min() <= t * max(1.0, np.abs(w).max()):
        raise ValueError("null directions present")
    M = V / np.sqrt(np.abs(w))
    if np.linalg.det(M) < 0:
        M[:, 0] = -M[:, 0]
    q = int(np.sum(w < 0))
    return P @ M, P.shape[1] - q, q


def phase_pq(P, tol: Optional[float] = None) -> PhaseReport:
    """theta and sign with sign * tau^q dz = exp(tau theta) dvol."""
    t = default_tol(tol)
    E, p, q = pseudo_orthonormalize(P, t)
    n = E.shape[1]
    S = E.T @ omega_matrix(n) @ E
    if np.abs(S).max() > max(t, 1e-8):
        raise ValueError("plane is not Lagrangian")
    w = dz_of(E)
    if q % 2:
        w = DNumber(w.im, w.re)  # multiplication by tau swaps parts
    comp = classify(w, t)
    if comp == "D+":
        sign = 1
    elif comp == "-D+":
        sign = -1
    else:
        raise ValueError(f"tau^q dz lies in {comp}, not in +-D+")
    _, theta = polar(DNumber(sign * w.re, sign * w.im))
    return PhaseReport((p, q), float(theta), sign)


def pairing_calibration(xi, eta) -> float:
    """<xi, eta> on Lambda^n via the signed Gram determinant of unit bases."""
    A = orthonormalize(xi)
    B = orthonormalize(eta)
    n = A.shape[1]
    for E in (A, B):
        if np.linalg.det(E[:n]) <= 0:
            raise ValueError("plane is not in the positive component")
    return float(np.linalg.det(A.T @ metric(n) @ B))


def null_decomposition(xi) -> list:
    """xi = sum over signs of n_1^s1 ^ .. ^ n_n^sn with n_j^+- = (e_j +- f_j)/2.

    e_j is a unit basis of xi and f_j a unit basis (<f, f> = -1) of its
    orthogonal complement, obtained from T e_j by projecting off xi and
    orthonormalizing.  For Lagrangian xi this is f_j = T e_j.  Each term
    times 2^n is the graph of the isometry e_j -> +-f_j, a totally null plane.
    """
    E = orthonormalize(xi)
    d, n = E.shape
    if n > 4:
        raise ValueError("expansion too large")
    Jm = metric(n)
    W = tau_matrix(n) @ E
    W = W - E @ (E.T @ Jm @ W)
    L = np.linalg.cholesky(-(W.T @ Jm @ W))
    Fb = np.linalg.solve(L, W.T).T
    terms = []
    for signs in product((1, -1), repeat=n):
        cols = 0.5 * (E + Fb * np.array(signs))
        terms.append((signs, forms.MultiVector.from_vectors(cols)))
    return terms


# ---------------------------------------------------------------------------
# Mealy inequality sampling

@dataclass
class MealyReport:
    n: int
    count: int
    seed: int
    eq_tol: float
    min_re_dz: float
    n_equality: int
    n_slag: int
    mismatches: int
    all_in_dplus: bool
    witness: Optional[dict] = None

    @property
    def passed(self) -> bool:
        return (self.min_re_dz >= 1.0 - self.eq_tol and self.mismatches == 0
                and self.all_in_dplus)

    def to_json(self) -> dict:
        return {"n": self.n, "count": self.count, "seed": self.seed, "eq_tol": self.eq_tol,
                "min_re_dz": self.min_re_dz, "n_equality": self.n_equality,
                "n_slag": self.n_slag, "mismatches": self.mismatches,
                "all_in_dplus": self.all_in_dplus, "passed": self.passed,
                "witness": self.witness}


_CHUNK = 500


def _mealy_chunk(n: int, count: int, seed_seq: np.random.SeedSequence, eq_tol: float) -> dict:
    rng = np.random.default_rng(seed_seq)
    frames = np.empty((count, 2 * n, n))
    for i in range(count):
        frames[i] = sample_plane(n, rng, STRATA[i % len(STRATA)])[0]
    b = _batched(frames, 1e-12)
    re = 0.5 * (b["dz_u"] + b["dz_v"])
    im = 0.5 * (b["dz_v"] - b["dz_u"])
    st = slag_tol(eq_tol)
    slag = (b["spacelike"] & (b["x_det"] > 0) & (b["omega_residual_gram"] <= st)
            & (np.abs(im) <= st))
    eq = re <= 1.0 + eq_tol
    return {"re": re, "im": im, "slag": slag, "eq": eq,
            "dplus": (b["dz_u"] > 0) & (b["dz_v"] > 0) & b["spacelike"]}


def mealy_experiment(n: int, count: int = 10000, seed: int = 0, eq_tol: float = 1e-9,
                     threads: int = 1) -> MealyReport:
    """Sample space-like positive planes and test Re dz >= 1 with equality
    exactly on the split SLAG ones.  Chunking is fixed, so the result does
    not depend on the thread count."""
    nchunks = (count + _CHUNK - 1) // _CHUNK
    seqs = np.random.SeedSequence([seed, n]).spawn(nchunks)
    sizes = [min(_CHUNK, count - i * _CHUNK) for i in range(nchunks)]
    args = [(n, s, q, eq_tol) for s, q in zip(sizes, seqs)]
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(lambda a: _mealy_chunk(*a), args))
    else:
        parts = [_mealy_chunk(*a) for a in args]
    re = np.concatenate([p["re"] for p in parts])
    slag = np.concatenate([p["slag"] for p in parts])
    eq = np.concatenate([p["eq"] for p in parts])
    dplus = np.concatenate([p["dplus"] for p in parts])
    bad = np.nonzero(slag != eq)[0]
    i_min = int(np.argmin(re))
    witness = {"index": i_min, "re_dz": float(re[i_min])}
    if bad.size:
        witness["mismatch_index"] = int(bad[0])
        witness["mismatch_re_dz"] = float(re[bad[0]])
    return MealyReport(n, count, seed, eq_tol, float(re.min()), int(eq.sum()), int(slag.sum()),
                       int(bad.size), bool(dplus.all()), witness)
