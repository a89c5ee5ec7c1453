# Estimate harness - empirical checks of the a priori estimates
