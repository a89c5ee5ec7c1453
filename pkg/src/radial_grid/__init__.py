# Radial grid - uniform mesh, discrete calculus and radial quadrature
