"""Analytic light-fluence, temperature and thermal-damage fields for
endovenous laser ablation, with a finite-difference verification oracle."""

__version__ = "0.1.0"
