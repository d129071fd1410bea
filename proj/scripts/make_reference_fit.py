#!/usr/bin/env python3
"""Independent reference fit for tests/data/school_synthetic.csv.

Fits the cumulative logit model with statsmodels' OrderedModel and writes
tests/data/school_synthetic_reference.json holding:

  * the unconstrained estimates in this project's sign convention
    (logit P(z <= j) = alpha_j + x'beta; statsmodels uses alpha_j - x'beta),
  * the constrained estimates, obtained by refitting with the funding
    "Mixed" dummy dropped (the constrained optimum pins that coefficient to
    zero, which turns the cone problem into an equality-constrained fit on
    a reduced design); the KKT sign condition is verified numerically,
  * both maximized log-likelihoods.

Run from the repository root:  python3 scripts/make_reference_fit.py
"""

import json

import numpy as np
import pandas as pd
from statsmodels.miscmodels.ordinal_model import OrderedModel

RESPONSE_LEVELS = ["Insufficient", "Medium-Low", "Medium", "High"]
PERF_LEVELS = ["Insufficient", "Medium-Low", "Medium", "High"]
FUND_LEVELS = ["Public", "Mixed", "Private"]


def design(df, drop_mixed=False):
    cols = {}
    for lv in PERF_LEVELS[1:]:
        cols[f"perf2016[{lv}]"] = (df["perf2016"] == lv).astype(float)
    for lv in FUND_LEVELS[1:]:
        if drop_mixed and lv == "Mixed":
            continue
        cols[f"funding[{lv}]"] = (df["funding"] == lv).astype(float)
    cols["regisRat"] = df["regisRat"].astype(float)
    return pd.DataFrame(cols)


def fit(df, drop_mixed):
    y = pd.Categorical(df["perf2019"], categories=RESPONSE_LEVELS, ordered=True)
    X = design(df, drop_mixed)
    model = OrderedModel(np.asarray(y.codes), X.to_numpy(), distr="logit")
    first = model.fit(method="bfgs", maxiter=500, disp=False)
    res = model.fit(start_params=first.params, method="lbfgs", maxiter=2000, pgtol=1e-12,
                    factr=10.0, disp=False)
    k_beta = X.shape[1]
    beta_sm = res.params[:k_beta]
    thresholds = model.transform_threshold_params(res.params)[1:-1]
    # our convention: logit P(z<=j) = alpha_j + x'beta  =>  beta = -beta_sm
    return {
        "names": list(X.columns),
        "alpha": [float(a) for a in thresholds],
        "beta": [float(-b) for b in beta_sm],
        "loglik": float(res.llf),
        "converged": bool(res.mle_retvals["converged"]),
    }


def main():
    df = pd.read_csv("tests/data/school_synthetic.csv")
    assert len(df) == 5333, len(df)

    unconstrained = fit(df, drop_mixed=False)
    assert unconstrained["converged"]

    reduced = fit(df, drop_mixed=True)
    assert reduced["converged"]

    # Reduced-fit KKT checks for the constrained optimum with the Mixed
    # coefficient at the cone boundary:
    #  * Private estimate must stay negative (interior of its constraint),
    #  * the score wrt the dropped Mixed dummy must push outward (<= 0).
    names = reduced["names"]
    private = reduced["beta"][names.index("funding[Private]")]
    assert private < 0, private

    beta = np.zeros(len(unconstrained["names"]))
    for i, name in enumerate(unconstrained["names"]):
        beta[i] = 0.0 if name == "funding[Mixed]" else reduced["beta"][names.index(name)]
    alpha = np.array(reduced["alpha"])
    X = design(df, drop_mixed=False).to_numpy()
    z = pd.Categorical(df["perf2019"], categories=RESPONSE_LEVELS, ordered=True).codes
    eta = X @ beta
    mixed_col = unconstrained["names"].index("funding[Mixed]")

    def sigma(v):
        return 1.0 / (1.0 + np.exp(-v))

    k = len(RESPONSE_LEVELS)
    grad_mixed = 0.0
    for i in range(len(z)):
        zi = z[i] + 1
        a = alpha[zi - 2] + eta[i] if zi > 1 else None
        b = alpha[zi - 1] + eta[i] if zi < k else None
        cb = sigma(b) if b is not None else 1.0
        ca = sigma(a) if a is not None else 0.0
        pi = cb - ca
        db = cb * (1 - cb) if b is not None else 0.0
        da = ca * (1 - ca) if a is not None else 0.0
        grad_mixed += (db - da) / pi * X[i, mixed_col]
    # Anti cone with Mixed active at its upper bound 0: the only direction
    # that could improve the likelihood is the infeasible one (upward), so
    # the gradient wrt Mixed must be nonnegative at the constrained optimum.
    assert grad_mixed >= -1e-6, grad_mixed

    out = {
        "n": int(len(df)),
        "umle": unconstrained,
        "cmle": {
            "names": unconstrained["names"],
            "alpha": reduced["alpha"],
            "beta": [float(v) for v in beta],
            "loglik": reduced["loglik"],
        },
        "notes": "reference fits from statsmodels OrderedModel (sign-adjusted); "
                 "the constrained fit comes from the reduced design with the "
                 "funding Mixed dummy dropped, KKT-checked",
    }
    with open("tests/data/school_synthetic_reference.json", "w") as fh:
        json.dump(out, fh, indent=1)
    print("umle alpha", unconstrained["alpha"])
    print("umle beta ", dict(zip(unconstrained["names"], unconstrained["beta"])))
    print("umle llf  ", unconstrained["loglik"])
    print("cmle beta ", dict(zip(out["cmle"]["names"], out["cmle"]["beta"])))
    print("cmle llf  ", out["cmle"]["loglik"])
    print("grad_mixed at constrained optimum:", grad_mixed)


if __name__ == "__main__":
    main()
