"""Display functions for iterreg."""

import sys
from typing import Dict, List, Sequence

from .experiments import (ComparisonRow, FilterConditionRow, NaiveSolveRow, RateEstimate,
                          SweepRecord, best_record, group_by_method)


def _highlight(text: str, good: bool) -> str:
    # Add color indicators for terminal if supported
    if not sys.stdout.isatty():
        return text
    color = "\033[92m" if good else "\033[91m"
    return f"{color}{text}\033[0m"


def print_records(records: Sequence[SweepRecord], parameter_name: str = "param"):
    """Print sweep records grouped by method, marking each group's best row."""
    groups: Dict[str, List[SweepRecord]] = group_by_method(records)
    for method, group in groups.items():
        best = best_record(group)
        print(f"\n{method}")
        print("-" * 80)
        print(f"{parameter_name:<14} {'error':<16} {'residual':<16} {'solution norm':<16}")
        print("-" * 80)
        for record in group:
            marker = _highlight("*", True) if record is best else ""
            print(f"{record.parameter:<14.6g} {record.error:<16.8g} "
                  f"{record.residual_norm:<16.8g} {record.solution_norm:<16.8g} {marker}")


def print_table1(rows: Sequence[NaiveSolveRow]):
    """Node errors of the unregularized solve, one column group per n."""
    print("\nError between exact and naive solution x(t) - x_i:")
    print("-" * 80)
    print(f"{'t':<8}" + "".join(f"{'n=' + str(row.n):<16}" for row in rows))
    print("-" * 80)
    labels = ["0", "1/4", "1/2", "3/4", "1"]
    columns = ["error_t0", "error_t1_4", "error_t1_2", "error_t3_4", "error_t1"]
    for label, column in zip(labels, columns):
        print(f"{label:<8}" + "".join(f"{getattr(row, column):<16.6g}" for row in rows))
    print("-" * 80)
    print(f"{'max':<8}" + "".join(f"{row.max_error:<16.6g}" for row in rows))
    print(f"{'cond':<8}" + "".join(f"{row.condition_number:<16.3e}" for row in rows))


def print_comparison(rows: Sequence[ComparisonRow]):
    print("\nMethod comparison (scaled l2 error):")
    print("-" * 80)
    print(f"{'delta':<10} {'alpha':<10} {'iterated Tik':<16} {'Landweber':<16} "
          f"{'new iterated':<16}")
    print("-" * 80)
    for row in rows:
        new = f"{row.err_new_iterated:<16.6g}"
        wins = row.err_new_iterated <= min(row.err_iterated_tikhonov, row.err_landweber)
        print(f"{row.delta:<10.3g} {row.alpha:<10.3g} {row.err_iterated_tikhonov:<16.6g} "
              f"{row.err_landweber:<16.6g} {_highlight(new, wins)}")


def print_rate(estimate: RateEstimate):
    print("\nConvergence rate:")
    print("-" * 80)
    print(f"{'delta':<12} {'alpha':<14} {'median error':<16} {'optimal bound':<16}")
    print("-" * 80)
    for delta, alpha, error, bound in zip(estimate.deltas, estimate.alphas,
                                          estimate.median_errors, estimate.bounds):
        print(f"{delta:<12.3g} {alpha:<14.6g} {error:<16.6g} {bound:<16.6g}")
    print(f"\nFitted slope: {estimate.slope:.4f} (optimal {estimate.target:.4f})")


def print_filter_conditions(rows: Sequence[FilterConditionRow]):
    print("\nFilter conditions:")
    print("-" * 80)
    print(f"{'method':<40} {'sup|q|':<10} {'gamma':<8} {'order':<8} {'ok':<6}")
    print("-" * 80)
    for row in rows:
        status = _highlight("yes" if row.regularizing else "no", row.regularizing)
        print(f"{row.method:<40} {row.q_bound:<10.4g} {row.gamma_fit:<8.3f} "
              f"{row.qualification_exponent:<8.3f} {status:<6}")
