import os
from dotenv import load_dotenv

# Force load .env from the same directory as this config file
basedir = os.path.abspath(os.path.dirname(__file__))
load_dotenv(os.path.join(basedir, ".env"))

# Output
OUTPUT_DIR = os.getenv("AEDT_OUTPUT_DIR", "results")

# Logging
LOG_LEVEL = os.getenv("AEDT_LOG_LEVEL", "INFO")
LOG_FILE = os.getenv("AEDT_LOG_FILE", "")
LOG_FORMAT = "%(asctime)s [%(levelname)s] %(message)s"
