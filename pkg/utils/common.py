"""
Shared helpers: timestamps, status printing and hashing
"""
import os
import sys
import time
import datetime
import hashlib


def get_time() -> str:
    """Get current timestamp in formatted string"""
    return datetime.datetime.fromtimestamp(time.time()).strftime("%Y-%m-%d_%H:%M:%S.%f")


def sha256_hash(text: str) -> str:
    """Calculate SHA256 hash of text"""
    sha256 = hashlib.sha256()
    sha256.update(text.encode('utf-8'))
    return sha256.hexdigest()


def debug_enabled() -> bool:
    return os.getenv('DEBUG_MODE', 'FALSE').upper() in ('TRUE', '1', 'YES')


def log(message: str, level: str = "INFO"):
    """
    打印状态信息到 stderr（stdout 只留给结果摘要）

    Args:
        message: 状态消息
        level: 日志级别 (INFO, WARNING, ERROR)
    """
    print(f"[{get_time()}] [{level}] {message}", file=sys.stderr)


def debug_print(message: str):
    if debug_enabled():
        log(message, level="DEBUG")


def default_workers() -> int:
    """Worker count for process pools, KOOPBOUND_WORKERS overrides the cpu count"""
    env_value = os.getenv('KOOPBOUND_WORKERS')
    if env_value:
        try:
            return max(1, int(env_value))
        except ValueError:
            log(f"ignoring KOOPBOUND_WORKERS={env_value!r}", level="WARNING")
    return max(1, min(8, os.cpu_count() or 1))
