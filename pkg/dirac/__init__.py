# Darboux transformations for the one-dimensional Dirac equation
