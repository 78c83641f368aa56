"""
relcont
=======

Numerical verification of the variational machinery of general-relativistic
continuum mechanics: tensor calculus on charts, world-tubes, continuum
Lagrangians, reduced Euler-Lagrange residuals, GHY boundary terms and
matched spacetimes.

Usage:
    from relcont.scenes import build_scene
    from relcont.harness import run_suite
    from relcont.models import SceneConfig

    report = run_suite(build_scene(SceneConfig(name="minkowski_dust")))
"""

import jax

jax.config.update("jax_enable_x64", True)

__version__ = "0.1.0"
