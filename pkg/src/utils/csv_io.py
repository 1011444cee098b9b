#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
CSV读写工具
统一UTF-8、逗号分隔、首行表头；浮点数按repr写出以保证读回后逐位相等
"""

import csv
import io
import os
import sys
from typing import Dict, Iterable, List, Sequence

from src.utils.errors import ConfigError
from src.utils.logger import get_logger

# 获取日志记录器
logger = get_logger(__name__)


def format_value(value) -> str:
    """格式化单元格，浮点数使用repr（可逐位往返）"""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """
    渲染为CSV文本

    Args:
        header: 表头
        rows: 数据行

    Returns:
        str: CSV文本（\\n换行）
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buffer.getvalue()


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """
    写CSV文件，path 为 "-" 时写到标准输出

    Args:
        path: 输出路径
        header: 表头
        rows: 数据行
    """
    text = render_csv(header, rows)
    if path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    logger.info(f"已写出CSV: {path}")


def parse_csv(text: str, header: Sequence[str]) -> List[Dict[str, str]]:
    """
    解析CSV文本并校验表头

    Raises:
        ConfigError: 表头不符
    """
    reader = csv.reader(io.StringIO(text))
    try:
        actual = next(reader)
    except StopIteration:
        raise ConfigError("CSV为空，缺少表头")
    if list(actual) != list(header):
        raise ConfigError(f"CSV表头应为 {','.join(header)}，实际 {','.join(actual)}")
    return [dict(zip(header, row)) for row in reader if row]


def read_csv(path: str, header: Sequence[str]) -> List[Dict[str, str]]:
    """读取CSV文件并校验表头"""
    with open(path, "r", encoding="utf-8") as f:
        return parse_csv(f.read(), header)
