"""Write the data behind the four figures (controls, phase space, densities, fidelity traces).

Usage: python3 scripts/reproduce_figures.py [output_dir]
"""

import sys

from qtransport import cli

MODELS = "derivative,smoothed,fourier"


def main(out="figures"):
    runs = [
        ("fig1_controls", ["synth", "--models", MODELS]),
        ("fig2_phase_space", ["classical", "--models", MODELS, "--initial-momentum", "0.5"]),
        ("fig3_densities", ["evolve"]),
        ("fig4_fidelity", ["fidelity", "--trace-samples", "257"]),
    ]
    for name, args in runs:
        code = cli.main([*args, "--output-dir", f"{out}/{name}"])
        if code:
            return code
        print(f"{name}: written to {out}/{name}")
    return 0


if __name__ == "__main__":
    sys.exit(main(*sys.argv[1:2]))
