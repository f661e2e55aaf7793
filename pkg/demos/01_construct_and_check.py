"""
Building and inspecting a thickened code
========================================

Take the [[13,1,3]] hypergraph product of two repetition codes, thicken it
with rep(3), and look at what the extra dimension buys: metachecks,
an infinite single-shot distance, and Z-checks that stay confined.
"""

import numpy as np

from hgpprep import analysis, gf2
from hgpprep.codes import hypergraph_product, repetition_code, star_code, thicken

# the base code: rep(3) x rep(3)
code, hgp_layout = hypergraph_product(repetition_code(3), repetition_code(3))
print("base code:", code)
print("X and Z distances:", [d.value for d in analysis.css_distance_exhaustive(code)])

# stack three sheets of it along rep(3)
thick, layout = thicken(code, repetition_code(3))
print("thickened:", thick)
print("unmeasured endpoint sheet:", layout.endpoints, "measurement order:", layout.orientation.schedule)

# every metacheck annihilates the Z-checks, so check errors leave a trace
assert not gf2.matmul(thick.MZ, thick.HZ).any()
print("metachecks:", thick.MZ.shape[0])

# homology of S_X -> Q -> S_Z -> M: the last two spaces carry nothing,
# which is what makes the single-shot distance infinite
print("homology dims:", analysis.homology_dims(analysis.css_chain(thick)))
print("single-shot distance:", analysis.single_shot_distance(thick.HZ, thick.MZ).value)

# the X distance grows with thickness while the Z distance stays put
dx, dz = analysis.css_distance_exhaustive(thick, cap=9)
print("thickened distances (X, Z):", dx.value, dz.value)

# confinement of the base X-checks: syndrome weight bounds reduced weight
prof = analysis.confinement_profile(code.HX, code.HZ, t=2)
print("confinement profile f(0..4):", np.round(prof[:5], 2))
# a single boundary flip can hide a weight-2 error, so f(x) = x is too tight
rep = analysis.confinement_check(code.HX, code.HZ, t=2, f=lambda x: 2 * x)
print(rep.summary())

# a star thickening prepares two copies at once
star_thick, star_layout = thicken(code, star_code(3, 2))
print("star(3,2) thickening:", star_thick, "endpoints:", star_layout.endpoints)
