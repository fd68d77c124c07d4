"""Environment-driven settings."""

import os

from dotenv import load_dotenv

load_dotenv()

LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

# Upper bound on the sum of 1/gamma^2 over all zeros with gamma > 0
TAIL_INV_SQ = float(os.getenv("ZEROFREE_TAIL_INV_SQ", "0.023105"))

# Published c30(0, 1e5), used only when no zeros file covers t0 = 1e5
C30_FALLBACK = float(os.getenv("ZEROFREE_C30_FALLBACK", "0.00027"))
C30_FALLBACK_T0 = 1e5

OUTPUT_DIR = os.getenv("ZEROFREE_OUT", "out")

PUSHGATEWAY_URL = os.getenv("PUSHGATEWAY_URL")
