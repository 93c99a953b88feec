#!/usr/bin/env python3
"""Regenerates src/pattern_table.inc, the fixed sampling pattern used by the
descriptor. The generated integer table is what ships; this script documents
how it was derived and is not run by the build."""
import math
import sys

VERSION = 1
PATTERN_SCALE = 0.85
RADII = [0.0, 2.9, 4.9, 7.4, 10.8]
COUNTS = [1, 10, 14, 15, 20]
SIGMA_SCALE = 1.3
SHORT_PAIRS = 512
LONG_MIN_DIST = 8.2
ROTATION_BINS = 128


def main(out):
    pts = []
    for r, n in zip(RADII, COUNTS):
        for k in range(n):
            a = k * 2 * math.pi / n
            x = PATTERN_SCALE * r * math.cos(a)
            y = PATTERN_SCALE * r * math.sin(a)
            s = SIGMA_SCALE * 0.5 if r == 0 else SIGMA_SCALE * PATTERN_SCALE * r * math.sin(math.pi / n)
            pts.append((round(256 * x), round(256 * y), round(256 * s)))
    pairs = []
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            dx = pts[j][0] - pts[i][0]
            dy = pts[j][1] - pts[i][1]
            pairs.append((dx * dx + dy * dy, i, j))
    pairs.sort()
    short = pairs[:SHORT_PAIRS]
    lmin = (LONG_MIN_DIST * 256) ** 2
    long_ = [p for p in pairs if p[0] > lmin]

    w = out.write
    w("// Generated by tools/gen_pattern_table.py. Do not edit.\n")
    w(f"// Pattern version {VERSION}: {len(pts)} points, {len(short)} short pairs, {len(long_)} long pairs.\n\n")
    w(f"inline constexpr int kPatternVersion = {VERSION};\n")
    w(f"inline constexpr int kRotationBins = {ROTATION_BINS};\n\n")
    w(f"inline constexpr std::array<PatternPoint, {len(pts)}> kPatternPoints{{{{\n")
    for x, y, s in pts:
        w(f"    {{{x}, {y}, {s}}},\n")
    w("}};\n\n")
    w(f"inline constexpr std::array<PatternPair, {len(short)}> kShortPairs{{{{\n")
    for _, i, j in short:
        w(f"    {{{i}, {j}}},\n")
    w("}};\n\n")
    w(f"inline constexpr std::array<PatternPair, {len(long_)}> kLongPairs{{{{\n")
    for _, i, j in long_:
        w(f"    {{{i}, {j}}},\n")
    w("}};\n\n")
    w(f"// cos/sin of bin * 2pi / {ROTATION_BINS}, Q14.\n")
    w(f"inline constexpr std::array<std::array<std::int32_t, 2>, {ROTATION_BINS}> kRotation{{{{\n")
    for b in range(ROTATION_BINS):
        a = b * 2 * math.pi / ROTATION_BINS
        w(f"    {{{round(16384 * math.cos(a))}, {round(16384 * math.sin(a))}}},\n")
    w("}};\n")


if __name__ == "__main__":
    main(sys.stdout if len(sys.argv) < 2 else open(sys.argv[1], "w"))
