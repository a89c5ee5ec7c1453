# Multiplier lab - energy-momentum tensor, multipliers and the divergence identity
