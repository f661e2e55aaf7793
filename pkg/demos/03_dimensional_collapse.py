"""
Collapsing the thickened code back to one sheet
===============================================

After preparation every bulk sheet is measured in X. The outcomes are
random, but the randomness is a Z-stabilizer of the thickened code, and
decoding sheet by sheet toward the boundary cancels it. Adding Z noise on
the bulk shows threshold-like behaviour between two code sizes.
"""

import numpy as np

from hgpprep import gf2
from hgpprep.codes import hypergraph_product, repetition_code, thicken
from hgpprep.decoders import SingleShotDecoder
from hgpprep.protocol import (
    NoiseModel,
    ProtocolOptions,
    ProtocolSimulator,
    bp_osd_step,
    collapse,
    reconstruct_sheet_views,
    sample_intrinsic_error,
)
from hgpprep.runner import build_code

# noiseless collapse: the intrinsic error never reaches the boundary
code, _ = hypergraph_product(repetition_code(3), repetition_code(3))
thick, layout = thicken(code, repetition_code(3))
step = bp_osd_step(SingleShotDecoder(code.HX, 0.01, 0.01))
rng = np.random.default_rng(3)
for _ in range(5):
    intr = sample_intrinsic_error(thick, rng)
    res = collapse(reconstruct_sheet_views(intr, layout, thick), step)
    left = intr[layout.sheet_qubits(layout.boundary_sheet)] ^ res.z[layout.boundary_sheet]
    print("bulk weight", gf2.weight(intr), "-> boundary residual is a stabilizer:", gf2.in_rowspace(code.HZ, left))

# bulk Z noise on two code sizes; larger is better below the crossing
specs = {
    "n=12": ("ldpc:n=12,wc=5,wr=6,seed=0,merge=1,full_rank=1", 4),
    "n=18": ("ldpc:n=18,wc=5,wr=6,seed=59,merge=1,full_rank=1", 9),
}
trials = 200
opts = ProtocolOptions(sectors=("z",))
for label, (classical, ell) in specs.items():
    hgp, _ = build_code({"family": "hgp", "classical": classical})
    sim = ProtocolSimulator(hgp, repetition_code(ell))
    rates = []
    for point, p in enumerate([0.003, 0.01, 0.02]):
        st = sim.run_point(NoiseModel(p_data=p, p_synd=0.0, seed=5), trials, point, opts)
        rates.append(f"p={p}: {st.rate('z'):.3f}")
    print(label, hgp, "; ".join(rates))
