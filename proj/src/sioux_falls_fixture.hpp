// Bundled Sioux Falls TNTP fixture (see data/ for the same files on disk).
#pragma once

namespace cumlog::fixture {

inline constexpr const char* sioux_falls_net = R"TNTP(<NUMBER OF ZONES> 24
<NUMBER OF NODES> 24
<FIRST THRU NODE> 1
<NUMBER OF LINKS> 76
<END OF METADATA>


~ 	Init node 	Term node 	Capacity 	Length 	Free Flow Time 	B	Power	Speed limit 	Toll 	Link Type	;
	1	2	25900.20064	6	6	0.15	4	0	0	1	;
	1	3	23403.47319	4	4	0.15	4	0	0	1	;
	2	1	25900.20064	6	6	0.15	4	0	0	1	;
	2	6	4958.180928	5	5	0.15	4	0	0	1	;
	3	1	23403.47319	4	4	0.15	4	0	0	1	;
	3	4	17110.52372	4	4	0.15	4	0	0	1	;
	3	12	23403.47319	4	4	0.15	4	0	0	1	;
	4	3	17110.52372	4	4	0.15	4	0	0	1	;
	4	5	17782.7941	2	2	0.15	4	0	0	1	;
	4	11	4908.82673	6	6	0.15	4	0	0	1	;
	5	4	17782.7941	2	2	0.15	4	0	0	1	;
	5	6	4947.995469	4	4	0.15	4	0	0	1	;
	5	9	10000	5	5	0.15	4	0	0	1	;
	6	2	4958.180928	5	5	0.15	4	0	0	1	;
	6	5	4947.995469	4	4	0.15	4	0	0	1	;
	6	8	4898.587646	2	2	0.15	4	0	0	1	;
	7	8	7841.81131	3	3	0.15	4	0	0	1	;
	7	18	23403.47319	2	2	0.15	4	0	0	1	;
	8	6	4898.587646	2	2	0.15	4	0	0	1	;
	8	7	7841.81131	3	3	0.15	4	0	0	1	;
	8	9	5050.193156	10	10	0.15	4	0	0	1	;
	8	16	5045.822583	5	5	0.15	4	0	0	1	;
	9	5	10000	5	5	0.15	4	0	0	1	;
	9	8	5050.193156	10	10	0.15	4	0	0	1	;
	9	10	13915.78842	3	3	0.15	4	0	0	1	;
	10	9	13915.78842	3	3	0.15	4	0	0	1	;
	10	11	10000	5	5	0.15	4	0	0	1	;
	10	15	13512.00155	6	6	0.15	4	0	0	1	;
	10	16	4854.917717	4	4	0.15	4	0	0	1	;
	10	17	4993.510694	8	8	0.15	4	0	0	1	;
	11	4	4908.82673	6	6	0.15	4	0	0	1	;
	11	10	10000	5	5	0.15	4	0	0	1	;
	11	12	4908.82673	6	6	0.15	4	0	0	1	;
	11	14	4876.508287	4	4	0.15	4	0	0	1	;
	12	3	23403.47319	4	4	0.15	4	0	0	1	;
	12	11	4908.82673	6	6	0.15	4	0	0	1	;
	12	13	25900.20064	3	3	0.15	4	0	0	1	;
	13	12	25900.20064	3	3	0.15	4	0	0	1	;
	13	24	5091.256152	4	4	0.15	4	0	0	1	;
	14	11	4876.508287	4	4	0.15	4	0	0	1	;
	14	15	5127.526119	5	5	0.15	4	0	0	1	;
	14	23	4924.790605	4	4	0.15	4	0	0	1	;
	15	10	13512.00155	6	6	0.15	4	0	0	1	;
	15	14	5127.526119	5	5	0.15	4	0	0	1	;
	15	19	14564.75315	3	3	0.15	4	0	0	1	;
	15	22	9599.180565	3	3	0.15	4	0	0	1	;
	16	8	5045.822583	5	5	0.15	4	0	0	1	;
	16	10	4854.917717	4	4	0.15	4	0	0	1	;
	16	17	5229.910063	2	2	0.15	4	0	0	1	;
	16	18	19679.89671	3	3	0.15	4	0	0	1	;
	17	10	4993.510694	8	8	0.15	4	0	0	1	;
	17	16	5229.910063	2	2	0.15	4	0	0	1	;
	17	19	4823.950831	2	2	0.15	4	0	0	1	;
	18	7	23403.47319	2	2	0.15	4	0	0	1	;
	18	16	19679.89671	3	3	0.15	4	0	0	1	;
	18	20	23403.47319	4	4	0.15	4	0	0	1	;
	19	15	14564.75315	3	3	0.15	4	0	0	1	;
	19	17	4823.950831	2	2	0.15	4	0	0	1	;
	19	20	5002.607563	4	4	0.15	4	0	0	1	;
	20	18	23403.47319	4	4	0.15	4	0	0	1	;
	20	19	5002.607563	4	4	0.15	4	0	0	1	;
	20	21	5059.91234	6	6	0.15	4	0	0	1	;
	20	22	5075.697193	5	5	0.15	4	0	0	1	;
	21	20	5059.91234	6	6	0.15	4	0	0	1	;
	21	22	5229.910063	2	2	0.15	4	0	0	1	;
	21	24	4885.357564	3	3	0.15	4	0	0	1	;
	22	15	9599.180565	3	3	0.15	4	0	0	1	;
	22	20	5075.697193	5	5	0.15	4	0	0	1	;
	22	21	5229.910063	2	2	0.15	4	0	0	1	;
	22	23	5000	4	4	0.15	4	0	0	1	;
	23	14	4924.790605	4	4	0.15	4	0	0	1	;
	23	22	5000	4	4	0.15	4	0	0	1	;
	23	24	5078.508436	2	2	0.15	4	0	0	1	;
	24	13	5091.256152	4	4	0.15	4	0	0	1	;
	24	21	4885.357564	3	3	0.15	4	0	0	1	;
	24	23	5078.508436	2	2	0.15	4	0	0	1	;
)TNTP";

inline constexpr const char* sioux_falls_trips = R"TNTP(<NUMBER OF ZONES> 24
<TOTAL OD FLOW> 360400.000000
<END OF METADATA>


Origin  1
    1 :    0.0;     2 :    100.0;     3 :    100.0;     4 :    500.0;     5 :    200.0;
    6 :    300.0;     7 :    500.0;     8 :    800.0;     9 :    500.0;     10 :    1300.0;
    11 :    500.0;     12 :    200.0;     13 :    500.0;     14 :    300.0;     15 :    500.0;
    16 :    500.0;     17 :    400.0;     18 :    100.0;     19 :    300.0;     20 :    300.0;
    21 :    100.0;     22 :    400.0;     23 :    300.0;     24 :    100.0;

Origin  2
    1 :    100.0;     2 :    0.0;     3 :    100.0;     4 :    200.0;     5 :    100.0;
    6 :    400.0;     7 :    200.0;     8 :    400.0;     9 :    200.0;     10 :    600.0;
    11 :    200.0;     12 :    100.0;     13 :    300.0;     14 :    100.0;     15 :    100.0;
    16 :    400.0;     17 :    200.0;     18 :    0.0;     19 :    100.0;     20 :    100.0;
    21 :    0.0;     22 :    100.0;     23 :    0.0;     24 :    0.0;

Origin  3
    1 :    100.0;     2 :    100.0;     3 :    0.0;     4 :    200.0;     5 :    100.0;
    6 :    300.0;     7 :    100.0;     8 :    200.0;     9 :    100.0;     10 :    300.0;
    11 :    300.0;     12 :    200.0;     13 :    100.0;     14 :    100.0;     15 :    100.0;
    16 :    200.0;     17 :    100.0;     18 :    0.0;     19 :    0.0;     20 :    0.0;
    21 :    0.0;     22 :    100.0;     23 :    100.0;     24 :    0.0;

Origin  4
    1 :    500.0;     2 :    200.0;     3 :    200.0;     4 :    0.0;     5 :    500.0;
    6 :    400.0;     7 :    400.0;     8 :    700.0;     9 :    700.0;     10 :    1200.0;
    11 :    1400.0;     12 :    600.0;     13 :    600.0;     14 :    500.0;     15 :    500.0;
    16 :    800.0;     17 :    500.0;     18 :    100.0;     19 :    200.0;     20 :    300.0;
    21 :    200.0;     22 :    400.0;     23 :    500.0;     24 :    200.0;

Origin  5
    1 :    200.0;     2 :    100.0;     3 :    100.0;     4 :    500.0;     5 :    0.0;
    6 :    200.0;     7 :    200.0;     8 :    500.0;     9 :    800.0;     10 :    1000.0;
    11 :    500.0;     12 :    200.0;     13 :    200.0;     14 :    100.0;     15 :    200.0;
    16 :    500.0;     17 :    200.0;     18 :    0.0;     19 :    100.0;     20 :    100.0;
    21 :    100.0;     22 :    200.0;     23 :    100.0;     24 :    0.0;

Origin  6
    1 :    300.0;     2 :    400.0;     3 :    300.0;     4 :    400.0;     5 :    200.0;
    6 :    0.0;     7 :    400.0;     8 :    800.0;     9 :    400.0;     10 :    800.0;
    11 :    400.0;     12 :    200.0;     13 :    200.0;     14 :    100.0;     15 :    200.0;
    16 :    900.0;     17 :    500.0;     18 :    100.0;     19 :    200.0;     20 :    300.0;
    21 :    100.0;     22 :    200.0;     23 :    100.0;     24 :    100.0;

Origin  7
    1 :    500.0;     2 :    200.0;     3 :    100.0;     4 :    400.0;     5 :    200.0;
    6 :    400.0;     7 :    0.0;     8 :    1000.0;     9 :    600.0;     10 :    1900.0;
    11 :    500.0;     12 :    700.0;     13 :    400.0;     14 :    200.0;     15 :    500.0;
    16 :    1400.0;     17 :    1000.0;     18 :    200.0;     19 :    400.0;     20 :    500.0;
    21 :    200.0;     22 :    500.0;     23 :    200.0;     24 :    100.0;

Origin  8
    1 :    800.0;     2 :    400.0;     3 :    200.0;     4 :    700.0;     5 :    500.0;
    6 :    800.0;     7 :    1000.0;     8 :    0.0;     9 :    800.0;     10 :    1600.0;
    11 :    800.0;     12 :    600.0;     13 :    600.0;     14 :    400.0;     15 :    600.0;
    16 :    2200.0;     17 :    1400.0;     18 :    300.0;     19 :    700.0;     20 :    900.0;
    21 :    400.0;     22 :    500.0;     23 :    300.0;     24 :    200.0;

Origin  9
    1 :    500.0;     2 :    200.0;     3 :    100.0;     4 :    700.0;     5 :    800.0;
    6 :    400.0;     7 :    600.0;     8 :    800.0;     9 :    0.0;     10 :    2800.0;
    11 :    1400.0;     12 :    600.0;     13 :    600.0;     14 :    600.0;     15 :    900.0;
    16 :    1400.0;     17 :    900.0;     18 :    200.0;     19 :    400.0;     20 :    600.0;
    21 :    300.0;     22 :    700.0;     23 :    500.0;     24 :    200.0;

Origin  10
    1 :    1300.0;     2 :    600.0;     3 :    300.0;     4 :    1200.0;     5 :    1000.0;
    6 :    800.0;     7 :    1900.0;     8 :    1600.0;     9 :    2800.0;     10 :    0.0;
    11 :    4000.0;     12 :    2000.0;     13 :    1900.0;     14 :    2100.0;     15 :    4000.0;
    16 :    4400.0;     17 :    3900.0;     18 :    700.0;     19 :    1800.0;     20 :    2500.0;
    21 :    1200.0;     22 :    2600.0;     23 :    1800.0;     24 :    800.0;

Origin  11
    1 :    500.0;     2 :    200.0;     3 :    300.0;     4 :    1400.0;     5 :    500.0;
    6 :    400.0;     7 :    500.0;     8 :    800.0;     9 :    1400.0;     10 :    4000.0;
    11 :    0.0;     12 :    1400.0;     13 :    1000.0;     14 :    1600.0;     15 :    1400.0;
    16 :    1400.0;     17 :    1000.0;     18 :    100.0;     19 :    400.0;     20 :    600.0;
    21 :    400.0;     22 :    1100.0;     23 :    1300.0;     24 :    600.0;

Origin  12
    1 :    200.0;     2 :    100.0;     3 :    200.0;     4 :    600.0;     5 :    200.0;
    6 :    200.0;     7 :    700.0;     8 :    600.0;     9 :    600.0;     10 :    2000.0;
    11 :    1400.0;     12 :    0.0;     13 :    1300.0;     14 :    700.0;     15 :    700.0;
    16 :    700.0;     17 :    600.0;     18 :    200.0;     19 :    300.0;     20 :    400.0;
    21 :    300.0;     22 :    700.0;     23 :    700.0;     24 :    500.0;

Origin  13
    1 :    500.0;     2 :    300.0;     3 :    100.0;     4 :    600.0;     5 :    200.0;
    6 :    200.0;     7 :    400.0;     8 :    600.0;     9 :    600.0;     10 :    1900.0;
    11 :    1000.0;     12 :    1300.0;     13 :    0.0;     14 :    600.0;     15 :    700.0;
    16 :    600.0;     17 :    500.0;     18 :    100.0;     19 :    300.0;     20 :    600.0;
    21 :    600.0;     22 :    1300.0;     23 :    800.0;     24 :    800.0;

Origin  14
    1 :    300.0;     2 :    100.0;     3 :    100.0;     4 :    500.0;     5 :    100.0;
    6 :    100.0;     7 :    200.0;     8 :    400.0;     9 :    600.0;     10 :    2100.0;
    11 :    1600.0;     12 :    700.0;     13 :    600.0;     14 :    0.0;     15 :    1300.0;
    16 :    700.0;     17 :    700.0;     18 :    100.0;     19 :    300.0;     20 :    500.0;
    21 :    400.0;     22 :    1200.0;     23 :    1100.0;     24 :    400.0;

Origin  15
    1 :    500.0;     2 :    100.0;     3 :    100.0;     4 :    500.0;     5 :    200.0;
    6 :    200.0;     7 :    500.0;     8 :    600.0;     9 :    900.0;     10 :    4000.0;
    11 :    1400.0;     12 :    700.0;     13 :    700.0;     14 :    1300.0;     15 :    0.0;
    16 :    1200.0;     17 :    1500.0;     18 :    200.0;     19 :    800.0;     20 :    1100.0;
    21 :    800.0;     22 :    2600.0;     23 :    1000.0;     24 :    400.0;

Origin  16
    1 :    500.0;     2 :    400.0;     3 :    200.0;     4 :    800.0;     5 :    500.0;
    6 :    900.0;     7 :    1400.0;     8 :    2200.0;     9 :    1400.0;     10 :    4400.0;
    11 :    1400.0;     12 :    700.0;     13 :    600.0;     14 :    700.0;     15 :    1200.0;
    16 :    0.0;     17 :    2800.0;     18 :    500.0;     19 :    1300.0;     20 :    1600.0;
    21 :    600.0;     22 :    1200.0;     23 :    500.0;     24 :    300.0;

Origin  17
    1 :    400.0;     2 :    200.0;     3 :    100.0;     4 :    500.0;     5 :    200.0;
    6 :    500.0;     7 :    1000.0;     8 :    1400.0;     9 :    900.0;     10 :    3900.0;
    11 :    1000.0;     12 :    600.0;     13 :    500.0;     14 :    700.0;     15 :    1500.0;
    16 :    2800.0;     17 :    0.0;     18 :    600.0;     19 :    1700.0;     20 :    1700.0;
    21 :    600.0;     22 :    1700.0;     23 :    600.0;     24 :    300.0;

Origin  18
    1 :    100.0;     2 :    0.0;     3 :    0.0;     4 :    100.0;     5 :    0.0;
    6 :    100.0;     7 :    200.0;     8 :    300.0;     9 :    200.0;     10 :    700.0;
    11 :    100.0;     12 :    200.0;     13 :    100.0;     14 :    100.0;     15 :    200.0;
    16 :    500.0;     17 :    600.0;     18 :    0.0;     19 :    300.0;     20 :    400.0;
    21 :    100.0;     22 :    300.0;     23 :    100.0;     24 :    0.0;

Origin  19
    1 :    300.0;     2 :    100.0;     3 :    0.0;     4 :    200.0;     5 :    100.0;
    6 :    200.0;     7 :    400.0;     8 :    700.0;     9 :    400.0;     10 :    1800.0;
    11 :    400.0;     12 :    300.0;     13 :    300.0;     14 :    300.0;     15 :    800.0;
    16 :    1300.0;     17 :    1700.0;     18 :    300.0;     19 :    0.0;     20 :    1200.0;
    21 :    400.0;     22 :    1200.0;     23 :    300.0;     24 :    100.0;

Origin  20
    1 :    300.0;     2 :    100.0;     3 :    0.0;     4 :    300.0;     5 :    100.0;
    6 :    300.0;     7 :    500.0;     8 :    900.0;     9 :    600.0;     10 :    2500.0;
    11 :    600.0;     12 :    400.0;     13 :    600.0;     14 :    500.0;     15 :    1100.0;
    16 :    1600.0;     17 :    1700.0;     18 :    400.0;     19 :    1200.0;     20 :    0.0;
    21 :    1200.0;     22 :    2400.0;     23 :    700.0;     24 :    400.0;

Origin  21
    1 :    100.0;     2 :    0.0;     3 :    0.0;     4 :    200.0;     5 :    100.0;
    6 :    100.0;     7 :    200.0;     8 :    400.0;     9 :    300.0;     10 :    1200.0;
    11 :    400.0;     12 :    300.0;     13 :    600.0;     14 :    400.0;     15 :    800.0;
    16 :    600.0;     17 :    600.0;     18 :    100.0;     19 :    400.0;     20 :    1200.0;
    21 :    0.0;     22 :    1800.0;     23 :    700.0;     24 :    500.0;

Origin  22
    1 :    400.0;     2 :    100.0;     3 :    100.0;     4 :    400.0;     5 :    200.0;
    6 :    200.0;     7 :    500.0;     8 :    500.0;     9 :    700.0;     10 :    2600.0;
    11 :    1100.0;     12 :    700.0;     13 :    1300.0;     14 :    1200.0;     15 :    2600.0;
    16 :    1200.0;     17 :    1700.0;     18 :    300.0;     19 :    1200.0;     20 :    2400.0;
    21 :    1800.0;     22 :    0.0;     23 :    2100.0;     24 :    1100.0;

Origin  23
    1 :    300.0;     2 :    0.0;     3 :    100.0;     4 :    500.0;     5 :    100.0;
    6 :    100.0;     7 :    200.0;     8 :    300.0;     9 :    500.0;     10 :    1800.0;
    11 :    1300.0;     12 :    700.0;     13 :    800.0;     14 :    1100.0;     15 :    1000.0;
    16 :    500.0;     17 :    600.0;     18 :    100.0;     19 :    300.0;     20 :    700.0;
    21 :    700.0;     22 :    2100.0;     23 :    0.0;     24 :    700.0;

Origin  24
    1 :    100.0;     2 :    0.0;     3 :    0.0;     4 :    200.0;     5 :    0.0;
    6 :    100.0;     7 :    100.0;     8 :    200.0;     9 :    200.0;     10 :    800.0;
    11 :    600.0;     12 :    500.0;     13 :    800.0;     14 :    400.0;     15 :    400.0;
    16 :    300.0;     17 :    300.0;     18 :    0.0;     19 :    100.0;     20 :    400.0;
    21 :    500.0;     22 :    1100.0;     23 :    700.0;     24 :    0.0;

)TNTP";

} // namespace cumlog::fixture
