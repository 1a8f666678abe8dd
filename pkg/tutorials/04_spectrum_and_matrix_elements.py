"""One-step unitary: matrix element decay and quasi-energy statistics.

Run with ``python3 tutorials/04_spectrum_and_matrix_elements.py``.
"""

from qwtsim.experiments import decay_run, spectrum_run

for k in (1.0, 100.0):
    r = decay_run(9, k)
    a = r.asymptotic.exponent if r.asymptotic else None
    i = r.intermediate.exponent if r.intermediate else None
    print(f"k={k:g}: asymptotic alpha={a}, intermediate alpha={i}", r.notes)

for k in (0.1, 1000.0):
    spec, st = spectrum_run(10, k)
    print(f"k={k:g}: KS p vs Poisson {st.ks_pvalue:.2f}, "
          f"P(s<0.1) relative to Poisson {st.ratio:.2f}")
