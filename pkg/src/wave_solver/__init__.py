# Wave solver - leapfrog stepping for linear and quasilinear radial waves
