"""K(m) benchmark toolkit: random CNF-box-m formulas, parameter inference, exact emission probabilities and satisfiability campaigns."""
