# Concurrent parameter sweeps.
