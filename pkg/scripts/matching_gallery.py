#!/usr/bin/env python3
"""Matching verdicts across a gallery of source/noise family pairs.

For each pair and power point, synthesizes the candidate jamming density and
prints whether the matching condition holds, the jammer's measured power, and
the saddle value of the game.
"""

import argparse

import jamlab as jl
from jamlab.matching import JammingGameConfig, synthesize_jammer

FAMILIES = {
    "gaussian": jl.gaussian,
    "laplace": jl.laplace,
    "uniform": jl.uniform,
    "rademacher": lambda v: jl.rademacher_scaled(v ** 0.5),
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--power-tx", type=float, default=1.0)
    parser.add_argument("--power-jam", type=float, default=1.0)
    parser.add_argument("--noise-var", type=float, default=1.0)
    args = parser.parse_args()

    print(f"P_T={args.power_tx:g}  P_A={args.power_jam:g}  "
          f"var_N={args.noise_var:g}")
    print(f"{'source':<12}{'noise':<12}{'beta':>6}  {'verdict':<10}"
          f"{'jam power':>10}  {'saddle':>8}  reason")
    for src_name, make_src in FAMILIES.items():
        for noise_name, make_noise in FAMILIES.items():
            cfg = JammingGameConfig(make_src(1.0), make_noise(args.noise_var),
                                    args.power_tx, args.power_jam)
            res = synthesize_jammer(cfg)
            power = "-" if not res.matched else f"{res.jammer_variance:.4f}"
            print(f"{src_name:<12}{noise_name:<12}{cfg.beta:>6.2f}  "
                  f"{res.verdict:<10}{power:>10}  {cfg.saddle_cost:>8.4f}  "
                  f"{res.reason}")


if __name__ == "__main__":
    main()
