#
# Default values and exit codes used across surfseg.
#

#
# Exit codes, see cli_root.main()
#
EXIT_CODE_QUIT = 0
EXIT_CODE_INTERNAL_ERROR = 1
EXIT_CODE_BAD_INPUT = 2
EXIT_CODE_NUMERICAL = 3

#
# CSV files are written with enough digits for an exact float64 round-trip
#
CSV_FLOAT_FORMAT = "%.17g"
ENERGY_FLOAT_FORMAT = "%.12g"
EVAL_SIGNIFICANT_DIGITS = 6

#
# D2C block
#
D2C_TAU = 1e-3
D2C_C_MIN = 1e-12
D2C_PIVOT_TOLERANCE = 1e-12
D2C_SIGMA_DEFAULT_REL = 0.1

#
# Smoothing block
#
SB_RESIDUAL_TOLERANCE = 1e-9

#
# Learning
#
SIGMA_REL = 0.1
KLD_EPS_P = 1e-12
KLD_SUM_TOLERANCE = 1e-9
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8

LR_PRETRAIN = 1e-4
EP_PRETRAIN = 50
LR_PREDICTOR = 1e-5
LR_SB = 1e-2
EP_UNET = 10
EP_SB = 10
ROUNDS = 5
W_INIT = 1e-5
BATCH_SIZE = 1
SCHEDULE_ALTERNATE = "alternate"
SCHEDULE_JOINT = "joint"

#
# Predictor
#
PATCH_ROWS = 9
PATCH_COLS = 9
TEMPERATURE = 1.0

#
# Synthetic data, the "bench-A" benchmark
#
BENCH_A_N_COLS = 60
BENCH_A_N_ROWS = 512
BENCH_A_SMOOTHNESS = 0.5
BENCH_A_N_HARMONICS = 3
BENCH_A_AMPLITUDE = 40.0
BENCH_A_RIDGE_WIDTH = 4.0
BENCH_A_IMAGE_NOISE_STD = 0.2

N_SAMPLES = 100
SPLIT = (0.6, 0.2, 0.2)
SPLIT_NAMES = ("train", "val", "test")

#
# Random streams, see random_utils.generator()
#
STREAM_SURFACE = 0
STREAM_IMAGE_NOISE = 1
STREAM_SPLIT = 2
STREAM_ORACLE = 3
STREAM_AUGMENT = 4
STREAM_BATCH_ORDER = 5

#
# Environment
#
THREADS_ENV = "SURFSEG_THREADS"
