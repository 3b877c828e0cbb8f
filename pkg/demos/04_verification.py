"""Confronting finite-time simulations with their limit laws.

Runs a convergence sweep for a perturbed tail (bias shrinking with t), an
independence check, and the negative-binomial functional check, printing
the per-step statistics from the reports.
"""

from ppratios import limit_laws as ll
from ppratios import tail_models as tm
from ppratios import verify as vf

trials = 20_000  # demo scale; the acceptance suite runs 10^5..10^6

print("convergence sweep: perturbed tail vs the pivot-ratio limit law")
model = tm.pareto_perturbed(1.0, 1.0, 1.0)
report = vf.convergence_sweep(model, 1, 1, [1e-1, 1e-2, 1e-4, 1e-6],
                              trials, vf.WLAW, seed=11)
for rec in report.statistics:
    print(f"  t = {rec['t']:8.0e}   KS = {rec['ks']:.4f}   p = {rec['p_value']:.3f}")
print(f"  threshold {report.threshold} at the smallest t -> pass = {report.passed}")

print("\nsuccessive-ratio independence for an exact power tail")
report = vf.independence_check(tm.pareto(1.0), 1.0, 1, 3, trials, seed=12)
for rec in report.statistics:
    print(f"  pair {rec['pair']}: chi2 = {rec['chi2']:.1f}  p = {rec['p_value']:.3f}")
print(f"  pass = {report.passed}")

print("\nnegative binomial functional check (both sampler constructions)")
probe = ll.LaplaceProbe(1.0, 0.5, 1.0)
for seed, method in ((13, "limit_ratios"), (14, "mixed_poisson")):
    report = vf.nb_functional_check(2, 1.0, probe, 0.5, trials, method, seed=seed)
    rec = report.statistics[0]
    print(f"  {method:14s} functional {rec['empirical_functional']:.4f} "
          f"vs {rec['expected_functional']:.4f} "
          f"(rel err {rec['rel_err']:.4f}), count-law p = {rec['p_value']:.3f}")

print("\nconditional-law proxies (binned conditioning)")
report = vf.z_insensitivity_check(tm.pareto(1.0), 1e-3, 1, 1, trials, seed=14)
print(f"  z-insensitivity: per-bin KS spread {report.details['ks_spread']:.4f} "
      f"< {report.threshold:.4f} -> pass = {report.passed}")
report = vf.conditional_gamma_check(tm.pareto(1.0), 1e-3, 1, 1, 0.5, 0.05,
                                    trials, seed=15)
print(f"  conditional gamma PIT: KS {report.statistics[0]['ks']:.4f} "
      f"< {report.threshold:.4f} -> pass = {report.passed}")
