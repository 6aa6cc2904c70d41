"""Count the zeros of sin on a disc and compare with the Bernstein bound."""

import math

from noetherian.bernstein import Disc, bernstein_index, check_zero_bound
from noetherian.dsl import compile_program
from noetherian.evaluate import Evaluator

f = compile_program("let s = sin(x) on domain(x: 0, 12)\n")["s"].function
ev = Evaluator(f.chain)
g = lambda z: ev.function_values(f, z.reshape(-1, 1))

disc = Disc(0j, 10.0)
rep = check_zero_bound(g, disc, 0.5)
# zeros are counted on the shrunk disc |z| < (1 - eps) * 10 = 5
print("zeros of sin in |z| < 5:", rep["zeros"], "(0, +-pi, +-2pi)")
print("bound from the index:", rep["bound"], "holds:", rep["holds"])
idx = bernstein_index(g, disc, gap=2.0)
print(f"index on the disc: {idx.index:.4f}   log 2 = {math.log(2):.4f}")
