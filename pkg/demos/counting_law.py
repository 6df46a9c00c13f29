"""How the three shape parameters bend the Poisson law.

Run with ``python demos/counting_law.py``.  At ``mu = theta_v = zeta = 1``
the counting law is Poisson; lowering ``mu`` fattens the tail and raises
the dispersion, while the relative mean deviation still shrinks as the
rate grows.
"""

from fcplab.fcp_core import FcpParams, fcp_mean, fcp_pmf_auto, fcp_variance, relative_mean_deviation

for shape in [(1.0, 1.0, 1.0), (0.8, 0.8, 1.0), (0.5, 0.5, 1.0)]:
    p = FcpParams(*shape, theta_t=1.0, lambda_theta=3.0)
    probs = fcp_pmf_auto(p, 1.0).probs
    head = ", ".join(f"{v:.4f}" for v in probs[:6])
    print(f"shape {shape}: P(0..5) = {head}")
    print(f"    mean {fcp_mean(p, 1.0):.4f}  variance {fcp_variance(p, 1.0):.4f}  "
          f"mass kept {probs.sum():.12f}")

# the dispersion of N / E[N] does not vanish, but it does decrease
p = FcpParams(0.5, 0.5, 1.0, 0.5, 1.0)
for lam in (1.0, 10.0, 100.0, 1000.0):
    print(f"lambda {lam:7.1f}: relative mean deviation {relative_mean_deviation(p.with_rate(lam), 1.0):.4f}")
