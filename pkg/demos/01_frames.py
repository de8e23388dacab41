"""
Frames over a two-point spectrum
================================

A module over C(X) with X = {t1, t2} is one vector space per point.  A
family of vectors is a frame when its frame operator is invertible in
every fiber at once.
"""
import numpy as np

from modframe import (
    FiniteSpectrum, FrameSystem, ModuleElement, ModuleShape,
    canonical_dual, canonical_parseval, frame_bounds, reconstruct_residual,
)

rng = np.random.default_rng(0)
shape = ModuleShape(FiniteSpectrum.of_size(2), (3, 2))

# six Gaussian vectors, one column per fiber
vectors = [ModuleElement(shape, (rng.standard_normal(3), rng.standard_normal(2)))
           for _ in range(6)]
frame = FrameSystem(shape, vectors)

b = frame_bounds(frame)
print("C, D            :", round(b.lower, 4), round(b.upper, 4))
print("pointwise lower :", b.lower_fn.values.real.round(4))
print("pointwise upper :", b.upper_fn.values.real.round(4))

# reconstruction through the canonical dual
x = ModuleElement(shape, (np.ones(3), np.arange(2.0)))
print("reconstruction residual:", reconstruct_residual(frame, x))
dual = canonical_dual(frame)
print("first dual vector, fiber t1:", dual[0].fibers[0].real.round(4))

# S^-1/2 turns the frame into a Parseval frame
pf = canonical_parseval(frame)
print("after canonicalization:", frame_bounds(pf).classification)
