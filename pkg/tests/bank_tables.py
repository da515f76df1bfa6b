"""Published allocation and capital-gain tables for 21 Indonesian bank stocks.

Columns are (method, gamma) pairs: moving-window and bootstrap intervals at
gamma 5, 50 and 100. Weights are the optimiser outputs as printed (5 dp),
shares are the whole-share counts bought with Rp 100,000 on 2023-03-24, and
gains are the per-asset capital gain when selling on 2023-03-30 (rising
market) or 2023-05-02 (falling market).
"""

CAPITAL = 100_000.0
BUY_DATE, GOOD_SELL_DATE, BAD_SELL_DATE = "2023-03-24", "2023-03-30", "2023-05-02"

COLUMNS = [("mw", 5), ("mw", 50), ("mw", 100), ("boot", 5), ("boot", 50), ("boot", 100)]

# code   buy   sell_good  sell_bad | weights x6 | shares x6 | gains_good x6 | gains_bad x6
_ROWS = """
BBCA 8825 8825 9050  | 0.07923 0.04409 0.01827 0 0 0             | 1 0 0 0 0 0      | 0 0 0 0 0 0              | 225 0 0 0 0 0
BBMD 1960 1960 1925  | 0 0.04584 0.05815 0 0 0.00994             | 0 2 3 0 0 1      | 0 0 0 0 0 0              | 0 -70 -105 0 0 -35
BBNI 9625 9350 9550  | 0 0 0 0 0 0                               | 0 0 0 0 0 0      | 0 0 0 0 0 0              | 0 0 0 0 0 0
BDMN 2830 2890 2770  | 0 0 0 0 0 0                               | 0 0 0 0 0 0      | 0 0 0 0 0 0              | 0 0 0 0 0 0
BINA 3990 3990 3970  | 0.10324 0.03235 0.02277 0 0 0             | 3 1 1 0 0 0      | 0 0 0 0 0 0              | -60 -20 -20 0 0 0
BJBR 1335 1370 1220  | 0 0.10305 0.11073 0 0.13762 0.1508        | 0 8 8 0 10 11    | 0 280 280 0 350 385      | 0 -920 -920 0 -1150 -1265
BJTM 735 735 665     | 0 0.19754 0.24193 0.44471 0.4168 0.38734  | 0 27 33 61 57 53 | 0 0 0 0 0 0              | 0 -1890 -2310 -4270 -3990 -3710
BMAS 1395 1415 1235  | 0 0 0 0 0 0                               | 0 0 0 0 0 0      | 0 0 0 0 0 0              | 0 0 0 0 0 0
BMRI 5450 10225 5250 | 0.08743 0 0 0 0 0                         | 2 0 0 0 0 0      | 9550 0 0 0 0 0           | -400 0 0 0 0 0
BNGA 1225 1275 1245  | 0.52335 0.14778 0.1045 0 0.03982 0.03897  | 43 12 9 0 3 3    | 2150 600 450 0 150 150   | 860 240 180 0 60 60
BNII 226 230 228     | 0 0 0.01915 0 0 0.02309                   | 0 0 8 0 0 10     | 0 0 32 0 0 40            | 0 0 16 0 0 20
BNLI 930 945 950     | 0 0 0.01231 0 0 0.0038                    | 0 0 1 0 0 0      | 0 0 15 0 0 0             | 0 0 20 0 0 0
BRIS 1610 1640 1685  | 0 0 0 0 0 0                               | 0 0 0 0 0 0      | 0 0 0 0 0 0              | 0 0 0 0 0 0
BSIM 890 890 890     | 0 0.03671 0.03587 0 0.00971 0.01612       | 0 4 4 0 1 2      | 0 0 0 0 0 0              | 0 0 0 0 0 0
BTPN 2490 2470 2490  | 0 0.00123 0.02361 0 0.04952 0.05379       | 0 0 1 0 2 2      | 0 0 -20 0 -40 -40        | 0 0 0 0 0 0
MASB 3420 3420 3180  | 0 0.06208 0.05241 0 0 0.00391             | 0 2 2 0 0 0      | 0 0 0 0 0 0              | 0 -480 -480 0 0 0
MEGA 5075 5125 4980  | 0 0 0.00459 0 0 0                         | 0 0 0 0 0 0      | 0 0 0 0 0 0              | 0 0 0 0 0 0
NISP 755 770 865     | 0.00482 0.07177 0.06518 0.02681 0.08367 0.07791 | 1 10 9 4 11 10 | 15 150 135 60 165 150 | 110 1100 990 440 1210 1100
PNBN 1415 1385 1040  | 0 0 0 0 0 0                               | 0 0 0 0 0 0      | 0 0 0 0 0 0              | 0 0 0 0 0 0
PNBS 58 60 58        | 0 0 0 0 0 0                               | 0 0 0 0 0 0      | 0 0 0 0 0 0              | 0 0 0 0 0 0
SDRA 585 590 560     | 0.20192 0.25755 0.24126 0.52848 0.26286 0.23433 | 35 44 39 90 45 40 | 175 220 195 450 225 200 | -875 -1100 -975 -2250 -1125 -1000
"""

# Printed column totals; several disagree with the sum of their own rows.
PRINTED_TOTALS_GOOD = [11715, 1030, 892, 60, 625, 685]
PRINTED_TOTALS_BAD = [735, -2040, -2629, -3830, -3870, -3830]

CODES, BUY, SELL_GOOD, SELL_BAD = [], [], [], []
WEIGHTS, SHARES, GAINS_GOOD, GAINS_BAD = ([[] for _ in COLUMNS] for _ in range(4))

for _line in _ROWS.strip().splitlines():
    _head, _w, _s, _gg, _gb = (part.split() for part in _line.split("|"))
    CODES.append(_head[0])
    BUY.append(float(_head[1]))
    SELL_GOOD.append(float(_head[2]))
    SELL_BAD.append(float(_head[3]))
    for _j in range(len(COLUMNS)):
        WEIGHTS[_j].append(float(_w[_j]))
        SHARES[_j].append(int(_s[_j]))
        GAINS_GOOD[_j].append(int(_gg[_j]))
        GAINS_BAD[_j].append(int(_gb[_j]))

assert len(CODES) == 21 and all(len(col) == 21 for col in WEIGHTS + SHARES + GAINS_GOOD + GAINS_BAD)
