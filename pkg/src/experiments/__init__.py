# Experiments - lifespan, continuation and continuity drivers
