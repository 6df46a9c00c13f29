"""Reliability of a structure hit by random shocks.

Each shock removes a Gamma(a, b) amount of resistance and a linear
gradual loss runs on top.  The structure fails once the resistance drops
below ``k_p``.  Fractional shock arrivals are burstier than Poisson ones,
which shows up in the failure curve.
"""

from fcplab.fcp_core import FcpParams
from fcplab.shock_model import ShockModel, reliability_curve

taus = [0.5, 1.0, 2.0, 4.0, 6.0]
for shape in [(1.0, 1.0, 1.0), (0.6, 0.6, 1.0)]:
    model = ShockModel(FcpParams(*shape, theta_t=1.0, lambda_theta=2.0), a=1.5, b=0.5,
                       r0=5.0, k_p=1.0, gradual=lambda t: 0.3 * t)
    _, fail = reliability_curve(model, taus)
    print(f"shape {shape}: F_T = " + ", ".join(f"{u}: {v:.4f}" for u, v in zip(taus, fail)))
