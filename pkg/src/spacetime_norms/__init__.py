# Spacetime norms - streaming E, Y and Z norms of solution traces
