# Regenerates the CSV fixtures deterministically.
import math
import random

# noiseless AR(2): b_t = 2 cos(0.4) b_{t-1} - b_{t-2}
with open("ar2_noiseless.csv", "w") as f:
    f.write("# sin(0.4 t + 0.3), t = 0..199; satisfies b_t = 2 cos(0.4) b_{t-1} - b_{t-2}\n")
    for t in range(200):
        f.write(repr(math.sin(0.4 * t + 0.3)) + "\n")

# degree-2 kernel fixture: n = 64 blocks, p = 4, d = 3
rng = random.Random(64)
n, p, d = 64, 4, 3
points = [[rng.uniform(-1.0, 1.0) for _ in range(p)] for _ in range(n + d - 1)]
coef = [0.8, -0.5, 0.3]
with open("poly2_points.csv", "w") as f:
    f.write("# 66 points in R^4, one per line\n")
    for x in points:
        f.write(",".join(repr(v) for v in x) + "\n")
with open("poly2_target.csv", "w") as f:
    f.write("# entry (i, a, c) at line i*16 + a*4 + c: sum_l coef_l x[a] x[c] + N(0, 0.01)\n")
    for i in range(n):
        for a in range(p):
            for c in range(p):
                s = sum(coef[l] * points[i + d - 1 - l][a] * points[i + d - 1 - l][c] for l in range(d))
                f.write(repr(s + rng.gauss(0.0, 0.1)) + "\n")
