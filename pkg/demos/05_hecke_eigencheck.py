# Pointwise check of the Hecke eigen-identity for the Eisenstein series E(z, 2).
import math

from horolab import eisenstein, verify_hecke_pointwise
from horolab.hecke import eisenstein_eigenvalue
from horolab.observables import const

points = [1j, 1 + 1.3j, -0.3 + 2j]
rep = verify_hecke_pointwise(eisenstein(2, 200), 2, 3, points)
print(rep.summary())
print("n^(1/2-s) sigma_(2s-1)(n) at n = 6:", eisenstein_eigenvalue(2, 6))

# constants are eigenfunctions too, with eigenvalue sigma(n)/sqrt(n)
rep = verify_hecke_pointwise(const(), 2, 3, points)
print(rep.summary(), " 12/sqrt(6) =", 12 / math.sqrt(6))

# no single-term collapse when pq is not squarefree
print(verify_hecke_pointwise(const(), 4, 1, points).summary())
