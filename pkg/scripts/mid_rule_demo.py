"""Compare the two rules for the constant value of eta_hat_p on the middle band.

With an asymmetric weight the one-sided limits at q1 and q2 differ.  The
"min" rule takes the smaller limit, so the middle value never exceeds either
one-sided limit.  The "left" rule always continues from q1.

    python3 scripts/mid_rule_demo.py
"""

from radvar import Constant, ProblemParams, RadialWeightSpec, build_aux_weight, decompose_degeneracy


def main():
    params = ProblemParams(1, 2.0, 0.0, 1.0)
    spec = RadialWeightSpec((Constant(4.0, 0.0, 0.5), Constant(1.0, 0.5, 1.0)))
    decomp = decompose_degeneracy(spec, params)
    print(f"{'rule':>5} {'q1 limit':>10} {'mid value':>10} {'q2 limit':>10} {'jump q1':>10} {'jump q2':>10}")
    for rule in ("min", "left"):
        band = build_aux_weight(decomp, spec, params, mid_rule=rule).bands[0]
        jumps = band.jumps
        print(
            f"{rule:>5} {band.q1_limit:10.6f} {band.mid_value:10.6f} {band.q2_limit:10.6f} "
            f"{jumps['q1']:10.6f} {jumps['q2']:10.6f}"
        )


if __name__ == "__main__":
    main()
