"""Exact constructions from counter machines to constant-sized quantum correlations.

The package is organised as a pipeline:

* :mod:`corrgroups.cyclotomic` -- exact arithmetic in cyclotomic fields,
* :mod:`corrgroups.minsky` -- two-state-convention counter machines and the
  glass/cycle extensions,
* :mod:`corrgroups.kms` -- word calculus for machine-derived group
  presentations,
* :mod:`corrgroups.presentations` -- binary linear systems, solution groups
  and their conjugacy-extended presentations,
* :mod:`corrgroups.coxeter` -- word problem for the reflection groups used by
  the trace construction,
* :mod:`corrgroups.dihedral` -- dihedral group algebra, idempotents and the
  fixed-size correlation pair,
* :mod:`corrgroups.correlations` -- scenarios, strategies and checks,
* :mod:`corrgroups.fnfamily` -- the trace-indexed correlation family,
* :mod:`corrgroups.numerics` -- floating-point tooling: defects, projective
  rounding, strategies from representations,
* :mod:`corrgroups.cli` -- command line front end.
"""

__version__ = "0.1.0"
