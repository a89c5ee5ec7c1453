# Initial data - profiles, Sobolev norms, scaling and mollification
