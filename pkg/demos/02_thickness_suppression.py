"""
Thicker codes suppress measurement noise
========================================

Prepare |+> on a 244-qubit HGP code by measuring the Z-checks of its
thickened version once. Noisy measurements are repaired with the
metachecks, so thicker codes fail less often. The same faults, read as
ell rounds of repeated measurement on the bare code, give the baseline.

Small trial counts keep this quick; configs/acceptance/exp1_n12.json runs
the full version through ``hgpprep simulate``.
"""

from hgpprep.codes import repetition_code
from hgpprep.protocol import NoiseModel, ProtocolOptions, ProtocolSimulator, RepeatedMeasurementBaseline
from hgpprep.runner import build_code

code, code_id = build_code({"family": "hgp", "classical": "ldpc:n=12,wc=5,wr=6,seed=0,merge=1,full_rank=1"})
code = code.with_logicals()
print(code_id, code)

trials = 500
opts = ProtocolOptions(sectors=("x",))
print(f"{'p':>7} {'ell':>3} {'protocol':>9} {'baseline':>9}")
for point, p in enumerate([0.003, 0.01, 0.03]):
    noise = NoiseModel(p_data=p, p_synd=p, seed=7)
    for ell in (1, 3, 5):
        sim = ProtocolSimulator(code, repetition_code(ell))
        prot = sim.run_point(noise, trials, point, opts)
        base = RepeatedMeasurementBaseline(code, ell).run_point(noise, trials, point)
        print(f"{p:7.3f} {ell:3d} {prot.rate('x'):9.4f} {base.rate('x'):9.4f}")
