import pytest

from vrp_benchlab.instances import parse_instance

TINY4 = """\
NAME : tiny4
TYPE : CVRP
DIMENSION : 4
EDGE_WEIGHT_TYPE : EUC_2D
CAPACITY : 30
NODE_COORD_SECTION
1 0 0
2 0 10
3 10 0
4 10 10
DEMAND_SECTION
1 0
2 10
3 10
4 30
DEPOT_SECTION
1
-1
EOF
"""

MATRIX3 = """\
NAME : matrix3
TYPE : CVRP
DIMENSION : 3
EDGE_WEIGHT_TYPE : EXPLICIT
EDGE_WEIGHT_FORMAT : FULL_MATRIX
CAPACITY : 10
EDGE_WEIGHT_SECTION
0 7 3
7 0 4
3 4 0
DEMAND_SECTION
1 0
2 5
3 5
DEPOT_SECTION
1
-1
EOF
"""

BKS_SAMPLE_CSV = """\
name,bks,reference
X-n101-k25,27591,table-1
X-n106-k14,26362,table-1
X-n110-k13,14971,table-1
X-n979-k58,118987,table-1
X-n1001-k43,72359,table-1
"""

RATINGS_CSV = """\
cpu_name,rating,base
Intel Xeon E3-1245 v5,2277,true
Intel Core2 Duo T5500,594,
test-cpu,2277,
"""


@pytest.fixture
def tiny4():
    return parse_instance(TINY4)


@pytest.fixture
def matrix3():
    return parse_instance(MATRIX3)
