"""Compound sums and the Bell-type moment polynomials.

Moments of the counting law are generalized Bell polynomials of the
operational time.  With all shape parameters at 1 they collapse to the
Touchard polynomials, so at ``x = 1`` they give the Bell numbers.
"""

from fcplab.bell_poly import gfbp, sgfbn
from fcplab.compound import Geometric, fgcp_cdf, fgcp_pmf_discrete
from fcplab.fcp_core import FcpParams, fcp_moment

print("Bell numbers:", [round(sgfbn(m, (1.0, 1.0, 1.0))) for m in range(7)])

p = FcpParams(0.6, 0.9, 1.4, theta_t=1.0, lambda_theta=2.0)
for m in range(1, 5):
    print(f"E[N^{m}] = {fcp_moment(p, m, 1.0):.6f} = B_{m}(x) = {gfbp(2.0, m, p.shape):.6f}")

# geometric batch sizes on top of the fractional count
jump = Geometric(0.5)
pmf = [fgcp_pmf_discrete(p, jump, s, 1.0) for s in range(8)]
print("P(S = 0..7):", ", ".join(f"{v:.4f}" for v in pmf))
print(f"P(S <= 7) = {fgcp_cdf(p, jump, 7.0, 1.0):.6f}")
