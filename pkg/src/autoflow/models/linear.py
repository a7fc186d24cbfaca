"""Linear, discriminant, Bayes, neighbour and baseline classifiers.

Every ``fit_*`` function takes ``(X, y, hp, seed)`` and returns a dict of
learned parameters (numpy arrays or scalars), which is all a fitted model
stores and all that gets serialized. ``score_*`` returns the positive-class
probability; ``decision_*`` returns a signed margin for the models without
probabilities (ridge, svm).
"""

import numpy as np

from ..rng import SplitMix64, derive_seed


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


# ---------------------------------------------------------------- logistic regression


def logistic_objective(theta, X, y, C):
    """L2-regularized logistic loss and its gradient.

    ``theta`` is ``[coef..., intercept]``; the intercept is not penalized.
    loss = 0.5 * ||coef||^2 + C * sum_i log(1 + exp(-s_i * z_i)), s_i = 2*y_i - 1.
    """
    w, b = theta[:-1], theta[-1]
    z = X @ w + b
    s = 2.0 * y - 1.0
    loss = 0.5 * (w @ w) + C * np.sum(np.logaddexp(0.0, -s * z))
    r = C * (sigmoid(z) - y)
    grad = np.empty_like(theta)
    grad[:-1] = w + X.T @ r
    grad[-1] = r.sum()
    return loss, grad


def fit_lr(X, y, hp, seed):
    """Damped Newton on :func:`logistic_objective`, starting from zero."""
    C = float(hp["C"])
    n, d = X.shape
    Xb = np.hstack([X, np.ones((n, 1))])
    reg = np.ones(d + 1)
    reg[-1] = 0.0
    theta = np.zeros(d + 1)
    loss, grad = logistic_objective(theta, X, y, C)
    g0 = max(1.0, np.abs(grad).max())
    for _ in range(int(hp["max_iter"])):
        if np.abs(grad).max() <= hp["tol"] * g0:
            break
        p = sigmoid(Xb @ theta)
        H = (Xb * (C * p * (1.0 - p))[:, None]).T @ Xb + np.diag(reg)
        try:
            step = np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, grad, rcond=None)[0]
        t = 1.0
        slope = grad @ step
        while t > 1e-10:
            cand = theta - t * step
            new_loss, new_grad = logistic_objective(cand, X, y, C)
            if new_loss <= loss - 1e-4 * t * slope:
                break
            t *= 0.5
        else:
            break
        theta, loss, grad = cand, new_loss, new_grad
    return {"coef": theta[:-1].copy(), "intercept": float(theta[-1]),
            "feature_std": X.std(axis=0)}


def score_lr(params, X):
    return sigmoid(X @ params["coef"] + params["intercept"])


# ---------------------------------------------------------------- ridge


def fit_ridge(X, y, hp, seed):
    """Ridge regression on +/-1 targets; intercept fit by centering."""
    t = 2.0 * y - 1.0
    xm, tm = X.mean(axis=0), t.mean()
    Xc = X - xm
    A = Xc.T @ Xc + float(hp["alpha"]) * np.eye(X.shape[1])
    coef = np.linalg.lstsq(A, Xc.T @ (t - tm), rcond=None)[0]
    return {"coef": coef, "intercept": float(tm - xm @ coef), "feature_std": X.std(axis=0)}


def decision_linear(params, X):
    return X @ params["coef"] + params["intercept"]


# ---------------------------------------------------------------- linear SVM


def fit_svm(X, y, hp, seed):
    """Hinge loss by Pegasos-style stochastic subgradient descent.

    Step size 1 / (alpha * t); the intercept is unregularized. One seeded
    shuffle per epoch, ``epochs`` passes in total.
    """
    alpha = float(hp["alpha"])
    n, d = X.shape
    s = 2.0 * y - 1.0
    w = np.zeros(d)
    b = 0.0
    rng = SplitMix64(derive_seed(seed, 30))
    t = 0
    for _ in range(int(hp["epochs"])):
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (alpha * t)
            margin = s[i] * (X[i] @ w + b)
            w *= 1.0 - eta * alpha
            if margin < 1.0:
                w += eta * s[i] * X[i]
                b += eta * s[i]
    return {"coef": w, "intercept": float(b), "feature_std": X.std(axis=0)}


# ---------------------------------------------------------------- discriminants


def _priors(y):
    p1 = float(y.mean())
    return np.array([1.0 - p1, p1])


def fit_lda(X, y, hp, seed):
    """Gaussian discriminant with a pooled (maximum-likelihood) covariance."""
    mu = np.array([X[y == c].mean(axis=0) for c in (0, 1)])
    R = X - mu[y.astype(int)]
    cov = R.T @ R / len(X)
    s = float(hp["shrinkage"])
    if s > 0:
        cov = (1 - s) * cov + s * np.trace(cov) / cov.shape[0] * np.eye(cov.shape[0])
    prec = np.linalg.pinv(cov, hermitian=True)
    coef = prec @ (mu[1] - mu[0])
    pri = _priors(y)
    intercept = float(-0.5 * (mu[1] + mu[0]) @ coef + np.log(pri[1] / pri[0]))
    return {"coef": coef, "intercept": intercept, "means": mu, "feature_std": X.std(axis=0)}


def score_lda(params, X):
    return sigmoid(X @ params["coef"] + params["intercept"])


def fit_qda(X, y, hp, seed):
    """Gaussian discriminant with one (unbiased) covariance per class.

    Covariances are stored as eigen-decompositions; eigenvalues are floored
    at 1e-12 times the largest so collinear features stay finite.
    """
    r = float(hp["reg_param"])
    out = {"priors": _priors(y)}
    for c in (0, 1):
        Xc = X[y == c]
        mu = Xc.mean(axis=0)
        cov = np.atleast_2d(np.cov(Xc, rowvar=False)) if len(Xc) > 1 else np.zeros((X.shape[1],) * 2)
        cov = (1 - r) * cov + r * np.eye(X.shape[1])
        evals, evecs = np.linalg.eigh(cov)
        floor = max(evals.max(), 1.0) * 1e-12
        out[f"mean{c}"] = mu
        out[f"evals{c}"] = np.maximum(evals, floor)
        out[f"evecs{c}"] = evecs
    return out


def score_qda(params, X):
    ll = []
    for c in (0, 1):
        Z = (X - params[f"mean{c}"]) @ params[f"evecs{c}"]
        ev = params[f"evals{c}"]
        ll.append(-0.5 * np.sum(np.log(ev)) - 0.5 * np.sum(Z * Z / ev, axis=1)
                  + np.log(params["priors"][c]))
    return sigmoid(ll[1] - ll[0])


def fit_nb(X, y, hp, seed):
    """Gaussian naive Bayes; variances smoothed by ``var_smoothing * max feature variance``."""
    eps = float(hp["var_smoothing"]) * float(np.var(X, axis=0).max())
    mu = np.array([X[y == c].mean(axis=0) for c in (0, 1)])
    var = np.array([X[y == c].var(axis=0) for c in (0, 1)]) + eps
    if eps == 0.0:
        var = np.where(var > 0, var, 1e-300)
    return {"means": mu, "vars": var, "priors": _priors(y)}


def score_nb(params, X):
    jll = []
    for c in (0, 1):
        mu, var = params["means"][c], params["vars"][c]
        jll.append(np.log(params["priors"][c]) - 0.5 * np.sum(np.log(2.0 * np.pi * var))
                   - 0.5 * np.sum((X - mu) ** 2 / var, axis=1))
    return sigmoid(jll[1] - jll[0])


# ---------------------------------------------------------------- neighbours and baseline


def fit_knn(X, y, hp, seed):
    return {"X": X.copy(), "y": y.astype(np.float64), "k": int(hp["n_neighbors"])}


def score_knn(params, X, chunk=256):
    """Fraction of positives among the k nearest training rows (Euclidean).

    Equal distances are resolved toward the lower training index.
    """
    Xt, yt = params["X"], params["y"]
    k = min(int(params["k"]), len(Xt))
    out = np.empty(len(X))
    for s in range(0, len(X), chunk):
        q = X[s:s + chunk]
        d2 = ((q[:, None, :] - Xt[None, :, :]) ** 2).sum(axis=2)
        nbrs = np.argsort(d2, axis=1, kind="stable")[:, :k]
        out[s:s + chunk] = yt[nbrs].mean(axis=1)
    return out


def fit_dummy(X, y, hp, seed):
    return {"prior": float(np.mean(y)) if len(y) else 0.0}


def score_dummy(params, X):
    return np.full(len(X), params["prior"])
