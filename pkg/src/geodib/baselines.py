"""k-means and GMM baselines, closed-form two-cluster scores, and decision boundaries.

Conventions for the two-Gaussian analysis: cluster 1 sits at the origin with
diagonal *variances* (sigma1**2, sigma2**2), cluster 2 at (L, 0) with isotropic
variance sigma**2. Scores are log-weight minus a divergence, so the predicted
cluster is the argmax.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.spatial.distance import directed_hausdorff
from scipy.special import logsumexp
from skimage.measure import find_contours

from .data import GaussianComponent, PointSet
from .dib import HardClustering
from .info import kl_matrix
from .smoothing import JointDistribution, gaussian_rows

log = logging.getLogger(__name__)

# smallest eigenvalue ratio accepted for an EM covariance before a ridge is added
COND_FLOOR = 1e-10


def _as_array(points) -> np.ndarray:
    if isinstance(points, PointSet):
        return points.points
    return np.atleast_2d(np.asarray(points, dtype=float))


# -- k-means -----------------------------------------------------------------

@dataclass(frozen=True)
class KMeansResult:
    centroids: np.ndarray
    assignment: np.ndarray
    inertia: float
    history: tuple[float, ...] = ()

    def predict(self, points) -> np.ndarray:
        return _nearest(_as_array(points), self.centroids)[0]


def _nearest(x, centroids):
    d2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    lab = np.argmin(d2, axis=1)
    return lab, d2[np.arange(x.shape[0]), lab]


def _kmeanspp(x, k, rng):
    centroids = [x[rng.integers(x.shape[0])]]
    d2 = ((x - centroids[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        idx = rng.integers(x.shape[0]) if total <= 0 else rng.choice(x.shape[0], p=d2 / total)
        centroids.append(x[idx])
        d2 = np.minimum(d2, ((x - x[idx]) ** 2).sum(axis=1))
    return np.array(centroids)


def _lloyd(x, centroids, max_iter):
    history = []
    lab, d2 = _nearest(x, centroids)
    history.append(float(d2.sum()))
    for _ in range(max_iter):
        centroids = centroids.copy()
        for c in range(centroids.shape[0]):
            members = lab == c
            if members.any():
                centroids[c] = x[members].mean(axis=0)
            else:
                # empty cluster: move it onto the point currently worst served
                far = int(np.argmax(d2))
                centroids[c] = x[far]
                lab[far] = c
                d2[far] = 0.0
        new_lab, d2 = _nearest(x, centroids)
        history.append(float(d2.sum()))
        if np.array_equal(new_lab, lab):
            break
        lab = new_lab
    return centroids, lab, history


def kmeans(points, k: int, seed: int = 0, restarts: int = 10, max_iter: int = 300) -> KMeansResult:
    """Lloyd's algorithm from k-means++ seeds; best inertia over restarts."""
    x = _as_array(points)
    if not 1 <= k <= x.shape[0]:
        raise ValueError("k must lie in [1, N]")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(max(restarts, 1)):
        cent, lab, hist = _lloyd(x, _kmeanspp(x, k, rng), max_iter)
        if best is None or hist[-1] < best.inertia:
            best = KMeansResult(cent, lab, hist[-1], tuple(hist))
    return best


# -- Gaussian mixtures -----------------------------------------------------------

@dataclass(frozen=True)
class GmmResult:
    components: tuple[GaussianComponent, ...]
    responsibilities: np.ndarray
    log_likelihood: float
    history: tuple[float, ...] = ()
    ridge_added: bool = False

    @property
    def weights(self) -> np.ndarray:
        w = np.array([c.weight for c in self.components])
        return w / w.sum()

    def predict(self, points) -> np.ndarray:
        return gmm_classifier(self.components)(points)


def log_gaussian(x, mean, cov) -> np.ndarray:
    x = _as_array(x)
    chol = np.linalg.cholesky(cov)
    z = np.linalg.solve(chol, (x - mean).T)
    half_logdet = np.log(np.diag(chol)).sum()
    return -0.5 * (z * z).sum(axis=0) - half_logdet - 0.5 * x.shape[1] * np.log(2 * np.pi)


def _em(x, resp, max_iter, tol, ridge):
    n, d = x.shape
    history = []
    ridged = False
    means = covs = weights = None
    for _ in range(max_iter):
        nk = resp.sum(axis=0) + 1e-300
        weights = nk / n
        means = (resp.T @ x) / nk[:, None]
        covs = []
        for c in range(resp.shape[1]):
            diff = x - means[c]
            cov = (resp[:, c, None] * diff).T @ diff / nk[c]
            cov = (cov + cov.T) / 2
            ev = np.linalg.eigvalsh(cov)
            # singular or numerically rank-deficient: Cholesky may still pass on rounding noise
            if ev[0] <= COND_FLOOR * max(ev[-1], 0.0):
                cov = cov + ridge * np.eye(d)
                ridged = True
            covs.append(cov)
        logp = np.stack([np.log(weights[c]) + log_gaussian(x, means[c], covs[c])
                         for c in range(resp.shape[1])], axis=1)
        norm = logsumexp(logp, axis=1)
        history.append(float(norm.sum()))
        resp = np.exp(logp - norm[:, None])
        if len(history) > 1 and abs(history[-1] - history[-2]) < tol:
            break
    return means, covs, weights, resp, history, ridged


def gmm_em(points, k: int, seed: int = 0, restarts: int = 1, max_iter: int = 500,
           tol: float = 1e-10) -> GmmResult:
    """Full-covariance EM started from k-means partitions."""
    x = _as_array(points)
    n, d = x.shape
    if not 1 <= k <= n:
        raise ValueError("k must lie in [1, N]")
    ridge = 1e-6 * float(np.mean(x.var(axis=0))) or 1e-6
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(max(restarts, 1)):
        km = kmeans(x, k, seed=int(rng.integers(2**32)), restarts=1)
        resp = np.zeros((n, k))
        resp[np.arange(n), km.assignment] = 1.0
        means, covs, weights, resp, hist, ridged = _em(x, resp, max_iter, tol, ridge)
        if best is None or hist[-1] > best.log_likelihood:
            comps = tuple(GaussianComponent(means[c], covs[c], max(weights[c], 1e-300)) for c in range(k))
            best = GmmResult(comps, resp, hist[-1], tuple(hist), ridged)
    if best.ridge_added:
        log.info("covariance ridge of %.3g added during EM", ridge)
    return best


# -- closed-form two-cluster scores ------------------------------------------------

def gaussian_kl(mean0, cov0, mean1, cov1) -> float:
    """KL[N(mean0, cov0) || N(mean1, cov1)] in nats."""
    mean0, mean1 = np.asarray(mean0, float), np.asarray(mean1, float)
    cov0, cov1 = np.atleast_2d(cov0), np.atleast_2d(cov1)
    k = mean0.shape[0]
    inv1 = np.linalg.inv(cov1)
    diff = mean1 - mean0
    _, ld0 = np.linalg.slogdet(cov0)
    _, ld1 = np.linalg.slogdet(cov1)
    return 0.5 * (np.trace(inv1 @ cov0) + diff @ inv1 @ diff - k + ld1 - ld0)


def gmm_hard_score(point, component: GaussianComponent, weight: float | None = None) -> float:
    """log w - T with T = Mahalanobis/2 + log sqrt(det covariance)."""
    x = np.asarray(point, float)
    w = component.weight if weight is None else weight
    diff = x - component.mean
    maha = diff @ np.linalg.solve(component.covariance, diff)
    _, logdet = np.linalg.slogdet(component.covariance)
    return float(np.log(w) - (0.5 * maha + 0.5 * logdet))


def dib_point_score(point, s: float, component: GaussianComponent, weight: float | None = None,
                    beta: float = 1.0) -> float:
    """log w - beta KL[N(point, s^2 I) || component]."""
    x = np.asarray(point, float)
    w = component.weight if weight is None else weight
    kl = gaussian_kl(x, s * s * np.eye(x.shape[0]), component.mean, component.covariance)
    return float(np.log(w) - beta * kl)


@dataclass(frozen=True)
class TwoClusterSetup:
    sigma1: float = 1.0
    sigma2: float = 1.0
    sigma: float = 1.0
    L: float = 4.0

    def components(self, w1=0.5, w2=0.5) -> tuple[GaussianComponent, GaussianComponent]:
        c1 = GaussianComponent(np.zeros(2), np.diag([self.sigma1 ** 2, self.sigma2 ** 2]), w1)
        c2 = GaussianComponent(np.array([self.L, 0.0]), self.sigma ** 2 * np.eye(2), w2)
        return c1, c2

    def score_gap_gmm(self, x1, w1, w2, x2=0.0) -> float:
        c1, c2 = self.components(w1, w2)
        p = (x1, x2)
        return gmm_hard_score(p, c1, w1) - gmm_hard_score(p, c2, w2)

    def score_gap_dib(self, x1, w1, w2, s, beta, x2=0.0) -> float:
        c1, c2 = self.components(w1, w2)
        p = (x1, x2)
        return dib_point_score(p, s, c1, w1, beta) - dib_point_score(p, s, c2, w2, beta)

    def bracket(self):
        return (-10.0 * self.L, 11.0 * self.L)


def axis_root(gap, bracket, near: float = 0.0) -> float:
    """Root of a score gap along the x1 axis; the sign change closest to ``near`` wins."""
    grid = np.linspace(*bracket, 4001)
    vals = np.array([gap(v) for v in grid])
    cross = np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))
    if cross.size == 0:
        raise ValueError("score gap does not change sign on the x1 axis")
    j = cross[np.argmin(np.abs(grid[cross] - near))]
    return brentq(gap, grid[j], grid[j + 1], xtol=1e-14, rtol=1e-15)


def weight_rescaling_check(w1: float, w2: float, beta: float, setup: TwoClusterSetup | None = None,
                           s: float = 1e-3) -> tuple[float, float]:
    """x1-axis boundary roots: DIB at (w1, w2, beta) and GMM at weights w**(1/beta)."""
    if w1 <= 0 or w2 <= 0:
        raise ValueError("weights must be positive")
    if beta < 1:
        raise ValueError("beta must be at least 1")
    setup = setup or TwoClusterSetup()
    r1, r2 = w1 ** (1 / beta), w2 ** (1 / beta)
    r1, r2 = r1 / (r1 + r2), r2 / (r1 + r2)
    tot = w1 + w2
    dib_root = axis_root(lambda v: setup.score_gap_dib(v, w1 / tot, w2 / tot, s, beta), setup.bracket(), setup.L / 2)
    gmm_root = axis_root(lambda v: setup.score_gap_gmm(v, r1, r2), setup.bracket(), setup.L / 2)
    return dib_root, gmm_root


# -- point classifiers -------------------------------------------------------------

def gmm_classifier(components, weights=None):
    comps = list(components)
    w = np.array([c.weight for c in comps]) if weights is None else np.asarray(weights, float)
    w = w / w.sum()

    def classify(points):
        x = _as_array(points)
        sc = np.stack([np.log(w[c]) + log_gaussian(x, comp.mean, comp.covariance)
                       for c, comp in enumerate(comps)], axis=1)
        return np.argmax(sc, axis=1)

    return classify


def dib_score_classifier(components, s, beta=1.0, weights=None):
    """Closed-form DIB rule: argmax log w - beta KL[N(x, s^2 I) || component]."""
    comps = list(components)
    w = np.array([c.weight for c in comps]) if weights is None else np.asarray(weights, float)
    w = w / w.sum()

    def classify(points):
        x = _as_array(points)
        d = x.shape[1]
        cols = []
        for c, comp in enumerate(comps):
            inv = np.linalg.inv(comp.covariance)
            _, ld = np.linalg.slogdet(comp.covariance)
            diff = x - comp.mean
            maha = np.einsum("ni,ij,nj->n", diff, inv, diff)
            kl = 0.5 * (s * s * np.trace(inv) + maha - d + ld - d * np.log(s * s))
            cols.append(np.log(w[c]) - beta * kl)
        return np.argmax(np.stack(cols, axis=1), axis=1)

    return classify


def kmeans_classifier(centroids):
    centroids = np.asarray(centroids, float)
    return lambda points: _nearest(_as_array(points), centroids)[0]


@dataclass
class DibClusterClassifier:
    """Extend a tabulated hard clustering to new points.

    A new point is smoothed with the joint's scale on the joint's grid and sent to
    argmax_c log q(c) - beta KL[p(x|new) || q(x|c)].
    """

    joint: JointDistribution
    clustering: HardClustering
    beta: float = 1.0
    chunk: int = 8192
    _log_q: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.joint.s is None:
            raise ValueError("classifier needs a smoothed joint distribution")
        self._log_q = np.log(self.clustering.cluster_mass)

    def scores(self, points) -> np.ndarray:
        x = _as_array(points)
        out = np.empty((x.shape[0], self.clustering.n_c))
        for a in range(0, x.shape[0], self.chunk):
            rows = gaussian_rows(x[a:a + self.chunk], self.joint.grid, self.joint.s)
            div = kl_matrix(rows, self.clustering.cluster_conditional)
            sc = self._log_q[None, :] - self.beta * div
            sc[np.isinf(div)] = -np.inf
            out[a:a + self.chunk] = sc
        return out

    def __call__(self, points) -> np.ndarray:
        return np.argmax(self.scores(points), axis=1)


def fit_dib_classifier(points, s: float, beta: float, init, bins: int | None = None):
    """Run DIB from the partition ``init`` on a smoothed table and wrap the result
    as a point classifier; returns (classifier, clustering, converged)."""
    from .dib import dib_solve_clustering
    from .smoothing import DEFAULT_BINS, build_grid, smooth_joint

    ps = points if isinstance(points, PointSet) else PointSet(points)
    joint = smooth_joint(ps, s, build_grid(ps, s, bins or DEFAULT_BINS))
    clus, converged, _, _ = dib_solve_clustering(joint, beta, init=np.asarray(init))
    return DibClusterClassifier(joint, clus, beta), clus, converged


def bisector_classifier(L: float):
    """Two equal isotropic clusters at (0,0) and (L,0)."""
    return lambda points: (_as_array(points)[:, 0] > L / 2).astype(int)


# -- boundary extraction -----------------------------------------------------------

DEFAULT_RESOLUTION = 400


def lattice(region, resolution):
    (x0, x1), (y0, y1) = region
    xs = np.linspace(x0, x1, resolution)
    ys = np.linspace(y0, y1, resolution)
    gx, gy = np.meshgrid(xs, ys)
    return xs, ys, np.column_stack([gx.ravel(), gy.ravel()])


def decision_boundary(classifier, region, resolution: int = DEFAULT_RESOLUTION) -> list[np.ndarray]:
    """Label-change contours of ``classifier`` on a lattice over ``region``.

    Returns polylines as (n, 2) arrays of data coordinates; empty when one label
    covers the whole region.
    """
    xs, ys, pts = lattice(region, resolution)
    labels = np.asarray(classifier(pts)).reshape(resolution, resolution)
    present = np.unique(labels)
    if present.size < 2:
        return []
    dx, dy = xs[1] - xs[0], ys[1] - ys[0]
    polylines = []
    # with two labels one indicator already traces every label change
    for lab in (present[:1] if present.size == 2 else present):
        field_ = (labels == lab).astype(float)
        for c in find_contours(field_, 0.5):
            polylines.append(np.column_stack([xs[0] + c[:, 1] * dx, ys[0] + c[:, 0] * dy]))
    return polylines


def boundary_distance(a, b) -> float:
    """Symmetric Hausdorff distance between two polyline sets."""
    if not a or not b:
        return float("inf")
    pa, pb = np.vstack(a), np.vstack(b)
    return max(directed_hausdorff(pa, pb)[0], directed_hausdorff(pb, pa)[0])


def write_polylines_csv(named, path) -> None:
    """Rows of (curve id, polyline index, x1, x2)."""
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["curve", "segment", "x1", "x2"])
        for name, polys in named.items():
            for j, poly in enumerate(polys):
                for x, y in poly:
                    w.writerow([name, j, repr(float(x)), repr(float(y))])
