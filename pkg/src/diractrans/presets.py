"""Named parameter presets for the sampling pipeline.

The correctness analysis behind the samplers works with a chain of
constants 1/n << 1/L << beta << delta << 1 that no finite n satisfies
literally. A preset is therefore a re-engineered compromise: a set of
knobs under which every window the vortex planner checks stays
satisfiable over a usable band of n, with the samplers validating their
outputs instead of trusting the asymptotics.

Knob summary (consumed by the planner, the samplers, or both):

  beta         vortex shrink rate; level i holds about beta**i * n vertices
  delta        final-block color surplus; |C_N|/|V_N| sits in [1, 2/delta)
  kappa        multiplicative slack on the planner's color-block windows
  L            absorber scale; reservoir draws use rate L**4/n
  eps          degree slack; blocks keep min degree (1/2 - eps) per color
  alpha        family extremality threshold (value <= alpha * m * n^2)
  alpha1       extremality cap checked on the final block
  alpha2       gadget multiplicity scale for absorber sampling
  tau          exceptionality threshold: r <= tau * n^2
  gamma        cap on |M| passed into a cover level, share of the upper block
  cap_hi       cap on a level's path budget b, share of the lower block
  eps_cleanup  bipartiteness slack for the extremal-route cleanups

With `desk`, the non-extremal vortex route is feasible for n roughly in
[313, 781] (five levels; four-level plans have no integer solution under
these windows). Below that band the dispatcher uses the exact solver or
reports infeasibility; the extremal and exceptional routes have no such
floor because their cleanups reduce to a near-complete bipartite core.
"""

DESK = {
    "beta": 0.4,
    "delta": 0.95,
    "kappa": 1.02,
    "L": 4,
    "eps": 0.1,
    "alpha": 0.05,
    "alpha1": 0.005,
    "alpha2": 0.011,
    "tau": 0.1,
    "gamma": 0.35,
    "cap_hi": 0.25,
    "eps_cleanup": 0.005,
}

PRESETS = {"desk": DESK}


def get_preset(name="desk"):
    """A fresh copy of the named preset dict."""
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; available: {sorted(PRESETS)}")
    return dict(PRESETS[name])
