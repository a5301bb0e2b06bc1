# Coupled multirate compressible Navier-Stokes solver
