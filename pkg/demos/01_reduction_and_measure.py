# Reducing points into the fundamental domain and integrating over it.
import math

import numpy as np

from horolab import quad_F, reduce, reduce_array, sample_F
from horolab.sl2 import UHPoint

# a point far down near the real axis
r = reduce(UHPoint(0.3, 1e-4))
print("reduced:", complex(r.z))
print("witness:", r.witness)

# the same thing for an array, witnesses as integer arrays
rng = np.random.default_rng(0)
z = rng.uniform(-3, 3, 5) + 1j * 10 ** rng.uniform(-3, 0, 5)
zr, (A, B, C, D) = reduce_array(z, return_witness=True)
for w, a, b, c, d in zip(zr, A, B, C, D):
    print(f"{w:.6f}  [[{a},{b}],[{c},{d}]]")

# the invariant measure has mass 1 on F; the cusp y >= a carries 3/(pi a)
for a in (1, 2, 5):
    q = quad_F(lambda w: (w.imag >= a) * 1.0, y_breaks=(a,))
    print(f"mass of y >= {a}: quad {q.value:.12f}  closed form {3 / (math.pi * a):.12f}")

# and the sampler agrees
w = sample_F(rng, 10**6)
print("sampled fraction with y >= 2:", np.mean(w.imag >= 2))
