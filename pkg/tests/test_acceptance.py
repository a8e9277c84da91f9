"""Acceptance criteria 1-7, one verdict line each (see the terminal summary)."""
from functools import lru_cache

import numpy as np

from cccbvp.bvp import solve
from cccbvp.examples import get_example
from cccbvp.harness import ExperimentConfig, run_convergence


@lru_cache(maxsize=None)
def study(example, p=None, methods=("quasi",), algorithms=("green",)):
    cfg = ExperimentConfig(example=example, p=p, methods=list(methods), algorithms=list(algorithms))
    return run_convergence(cfg)


def within(got, want, rel):
    return abs(got - want) <= rel * abs(want)


def rows_within(errors, table, rel, label):
    return [(within(e, w, rel), f"{label} n-row {i + 1}: {e:.5e} vs {w:.5e}") for i, (e, w) in enumerate(zip(errors, table))]


REF_1A_QUASI = [0.48545e-03, 0.12130e-03, 0.30320e-04]
REF_1A_COLLOC = [0.69229e-06, 0.64411e-07, 0.59423e-08]
REF_1A_COLLOC_ALL = [0.69229e-06, 0.64411e-07, 0.59423e-08, 0.54331e-09, 0.49382e-10, 0.44657e-11, 0.40257e-12,
                      0.36190e-13, 0.32283e-14, 0.54123e-15, 0.45797e-15, 0.10825e-14, 0.10825e-14, 0.11796e-14]
REF_1B_QUASI = [0.10289e-02, 0.39974e-03, 0.10698e-03]
REF_1B_COLLOC = [0.33555e-03, 0.30239e-04, 0.18377e-04]
REF_2 = [0.4124e-05, 0.1028e-05, 0.2570e-06]
REF_2_ORDERS = [2.00357, 2.00090]


def test_criterion_1_example_1a(criterion):
    r = study("1a", methods=("colloc", "quasi"))
    quasi, colloc = r.errors("quasi", "green"), r.errors("colloc", "green")
    checks = rows_within(quasi[:3], REF_1A_QUASI, 0.02, "quasi")
    checks += rows_within(colloc[:3], REF_1A_COLLOC, 0.05, "colloc")
    deep = [i for i, w in enumerate(REF_1A_COLLOC_ALL) if w < 1e-13]
    checks += [(colloc[i] <= 1e-13, f"deep colloc row {i + 1}: {colloc[i]:.2e} > 1e-13") for i in deep]
    criterion(1, "Example 1a errors (quasi 2%, colloc 5%, deep rows <= 1e-13)", checks)


def test_criterion_2_example_1b(criterion):
    r = study("1b", methods=("colloc", "quasi"))
    quasi, colloc = r.errors("quasi", "green"), r.errors("colloc", "green")
    checks = rows_within(quasi[:3], REF_1B_QUASI, 0.10, "quasi")
    checks += rows_within(colloc[:3], REF_1B_COLLOC, 0.10, "colloc")
    checks += [(bool(np.all(colloc < quasi)), "colloc < quasi on every row")]
    ratio_1b = quasi[0] / colloc[0]
    a = study("1a", methods=("colloc", "quasi"))
    ratio_1a = a.errors("quasi", "green")[0] / a.errors("colloc", "green")[0]
    checks += [(ratio_1b <= 30, f"1b row-1 ratio {ratio_1b:.1f} > 30"), (ratio_1a >= 700, f"1a row-1 ratio {ratio_1a:.1f} < 700")]
    criterion(2, f"Example 1b errors 10%, colloc < quasi, ratio {ratio_1b:.2f} vs {ratio_1a:.0f}", checks)


def test_criterion_3_example_2_p10(criterion):
    r = study("2", 10.0, algorithms=("deboor", "green"))
    checks = []
    for a in ("deboor", "green"):
        checks += rows_within(r.errors("quasi", a)[:3], REF_2, 0.02, a)
        o = r.orders("quasi", a)[:2]
        checks += [(abs(g - w) <= 0.05, f"{a} order {g:.6f} vs {w}") for g, w in zip(o, REF_2_ORDERS)]
    ex = get_example("2", 10.0)
    x = np.linspace(0, 1, 20001)
    y_norm = np.max(np.abs(ex.exact.y(x)))
    for sub in (20, 40, 80):
        s1 = solve(ex.problem, ex.mv, sub, "quasi", "deboor")(x)
        s2 = solve(ex.problem, ex.mv, sub, "quasi", "green")(x)
        gap = np.max(np.abs(s1 - s2))
        checks.append((gap <= 1e-9 * y_norm, f"|s1 - s2| = {gap:.2e} at {sub} subintervals"))
    criterion(3, "Example 2 p=10 errors 2%, orders +-0.05, algorithms agree to 1e-9 |y|", checks)


def test_criterion_4_example_2_large_p(criterion):
    r100 = study("2", 100.0, algorithms=("deboor", "green"))
    r1000 = study("2", 1000.0)
    g100, g1000 = r100.errors("quasi", "green"), r1000.errors("quasi", "green")
    checks = [
        (within(g100[0], 0.5076e-07, 0.10), f"p=100 n=23 green {g100[0]:.4e}"),
        (0.5 * 0.623e-09 <= g1000[0] <= 2 * 0.623e-09, f"p=1000 n=23 green {g1000[0]:.4e}"),
    ]
    for p, r in ((100, r100), (1000, r1000)):
        o = r.orders("quasi", "green")
        checks += [(1.95 <= v <= 2.2, f"p={p} order {i + 2}: {v:.4f}") for i, v in enumerate(o)]
    flags = [row.unstable[("quasi", "deboor")] for row in r100.rows]
    checks.append((all(flags), f"deboor p=100 unstable rows {sum(flags)}/{len(flags)}"))
    criterion(4, "Example 2 p=100/1000 green errors and orders, deboor p=100 flagged unstable", checks)


def test_criterion_5_example_3(criterion):
    r = study("3", 1e4)
    e = r.errors("quasi", "green")
    rhs = np.array([row.rhs_errors["quasi"] for row in r.rows])
    n = r.n_values()
    plateau = [i for i, v in enumerate(n) if 24 <= v <= 644]
    tail = [i for i, v in enumerate(n) if v >= 1284]
    checks = [(0.2e-7 / 1.5 <= e[i] <= 0.2e-7 * 1.5, f"plateau n={n[i]}: {e[i]:.3e}") for i in plateau]
    checks += [(e[i] < e[i - 1], f"not decreasing at n={n[i]}: {e[i]:.3e}") for i in tail]
    checks += [(within(rhs[i], 0.368, 0.10), f"|L2 s - f| at n={n[i]}: {rhs[i]:.4f}") for i in plateau]
    criterion(5, "Example 3 p=1e4 plateau 2.0e-8, decay from n=1284, |L2 s - f| = 0.368", checks)


def test_criterion_6_property_suites(criterion):
    import test_properties as tp

    suites = [
        tp.test_partition_of_unity, tp.test_schoenberg_reproduction_and_bound, tp.test_interpolation_round_trip,
        tp.test_greville_bracketing, tp.test_greens_kernel_shape, tp.test_boundary_conditions_exact,
        tp.test_homogeneous_reproduces_boundary_element,
    ]
    checks = []
    for suite in suites:
        try:
            suite()
            checks.append((True, suite.__name__))
        except Exception as exc:  # one line per failing suite
            checks.append((False, f"{suite.__name__}: {type(exc).__name__}"))
    criterion(6, f"property suites ({len(suites)} hypothesis runs)", checks)


def test_criterion_7_condition_numbers(criterion):
    checks = []
    for name in ("1a", "1b"):
        r = study(name, methods=("colloc", "quasi"))
        kap = [row.kappa["colloc"] for row in r.rows]
        checks += [(abs(k - 2.41) <= 0.1, f"{name} kappa {k:.4f} at n={row.n}") for k, row in zip(kap, r.rows)]
    lo = min(row.kappa["colloc"] for row in study("1a", methods=("colloc", "quasi")).rows)
    criterion(7, f"Example 1 kappa within 2.41 +- 0.1 on all 14 rows (min {lo:.4f})", checks)
