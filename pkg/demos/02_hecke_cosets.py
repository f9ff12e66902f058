# Coset tables for the rational-slope subgroups and the Hecke sets T(n).
from horolab import coset_reps_T, double_coset_check, enumerate_gamma_cosets
from horolab.hecke import all_reps_Tn, sigma

s = enumerate_gamma_cosets(2, 3)
print(f"Gamma_(2/3): {s.M} cosets, psi(6) = {s.psi}, (p+1)(q+1) = {s.paper_index}")
for h in s.reps[:4]:
    print("  ", h)

# the two index formulas part ways once p or q is a prime power
s = enumerate_gamma_cosets(4, 1)
print(f"Gamma_(4/1): {s.M} cosets, psi(4) = {s.psi}, (p+1)(q+1) = {s.paper_index}")

print("T(1,2):", [str(r) for r in coset_reps_T(1, 2).reps])
print("|T(12)| =", len(all_reps_Tn(12)), "sigma(12) =", sigma(12))

# diag(p,q) h_m runs over T(1,pq) exactly once when pq is squarefree
for p, q in [(2, 3), (2, 5), (4, 1)]:
    rep = double_coset_check(p, q)
    print((p, q), "applicable" if rep.applicable else "not applicable", rep.holds)
