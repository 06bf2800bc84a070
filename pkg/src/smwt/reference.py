"""Reference objective values of the unweighted Rubin and Gagne benchmark suites.

Keys are instance ids; values are ``(n, optimum)``.  Two entries are best known
upper bounds rather than proven optima; they are listed in ``UPPER_BOUND_ONLY``.
"""

REFERENCE_OPTIMA: dict[int, tuple[int, int]] = {
    401: (15, 90),
    402: (15, 0),
    403: (15, 3418),
    404: (15, 1067),
    405: (15, 0),
    406: (15, 0),
    407: (15, 1861),
    408: (15, 5660),
    501: (25, 261),
    502: (25, 0),
    503: (25, 3497),
    504: (25, 0),
    505: (25, 0),
    506: (25, 0),
    507: (25, 7225),
    508: (25, 1915),
    601: (35, 12),
    602: (35, 0),
    603: (35, 17587),
    604: (35, 19092),
    605: (35, 228),
    606: (35, 0),
    607: (35, 12969),
    608: (35, 4732),
    701: (45, 97),
    702: (45, 0),
    703: (45, 26506),
    704: (45, 15206),
    705: (45, 200),
    706: (45, 0),
    707: (45, 23789),
    708: (45, 22807),
    551: (55, 183),
    552: (55, 0),
    553: (55, 40498),
    554: (55, 14653),
    555: (55, 0),
    556: (55, 0),
    557: (55, 35813),
    558: (55, 19871),
    651: (65, 247),
    652: (65, 0),
    653: (65, 57500),
    654: (65, 34301),
    655: (65, 0),
    656: (65, 0),
    657: (65, 54895),
    658: (65, 27114),
    751: (75, 225),
    752: (75, 0),
    753: (75, 77544),
    754: (75, 35200),
    755: (75, 0),
    756: (75, 0),
    757: (75, 59635),
    758: (75, 38339),
    851: (85, 360),
    852: (85, 0),
    853: (85, 97497),
    854: (85, 79042),
    855: (85, 258),
    856: (85, 0),
    857: (85, 87011),
    858: (85, 74739),
}

UPPER_BOUND_ONLY = frozenset({851, 855})


def reference_cost(instance_id: int | str) -> int:
    return REFERENCE_OPTIMA[int(instance_id)][1]
