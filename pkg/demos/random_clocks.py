"""Running the counting process on a random clock.

The time-changed process evaluates the counting law at ``H(t)`` for a
subordinator ``H``.  A unit drift gives back the original process, a gamma
clock keeps every moment, and a stable clock loses moments of order
``theta / alpha`` and above.
"""

import math

from fcplab.errors import MomentNonexistenceError
from fcplab.fcp_core import FcpParams
from fcplab.montecarlo import RngStream, sample_tcfcp_counts, tv_distance
from fcplab.subordinators import AlphaStable, Drift, GammaSub
from fcplab.tcfcp import TcfcpModel, tcfcp_mean, tcfcp_pmf_auto, tcfcp_variance

p = FcpParams(0.8, 0.8, 1.0, theta_t=0.4, lambda_theta=1.0)
for sub in (Drift(1.0), GammaSub(1.0, 1.0), AlphaStable(0.8)):
    model = TcfcpModel(p, sub)
    probs = tcfcp_pmf_auto(model, 1.0).probs
    try:
        var = tcfcp_variance(model, 1.0)
    except MomentNonexistenceError:
        var = math.inf
    draws = sample_tcfcp_counts(p, sub, 1.0, RngStream(7), 100_000)
    print(f"{type(sub).__name__:12s} P(0) {probs[0]:.5f}  mean {tcfcp_mean(model, 1.0):.4f}  "
          f"variance {var:.4f}  TV to 1e5 draws {tv_distance(draws, probs):.4f}")
