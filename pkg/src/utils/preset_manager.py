#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
预设管理模块
加载 config/presets 下的命名实验文档（*.conf）
"""

import os
from typing import Dict, List

from src.utils.config import Config
from src.utils.errors import ConfigError
from src.utils.logger import get_logger

# 获取日志记录器
logger = get_logger(__name__)

PRESET_SUFFIX = ".conf"


class PresetManager:
    """预设管理器，负责加载和提供实验配置预设"""

    _instance = None
    _presets: Dict[str, str] = {}

    def __new__(cls):
        """单例模式"""
        if cls._instance is None:
            cls._instance = super(PresetManager, cls).__new__(cls)
            cls._instance._load_presets()
        return cls._instance

    def _load_presets(self):
        """加载预设目录下的全部 .conf 文件"""
        presets_dir = Config.get_presets_path()
        self._presets = {}
        if not os.path.isdir(presets_dir):
            logger.warning(f"预设目录不存在: {presets_dir}")
            return
        for file_name in sorted(os.listdir(presets_dir)):
            if file_name.endswith(PRESET_SUFFIX):
                name = os.path.splitext(file_name)[0]
                with open(os.path.join(presets_dir, file_name), "r", encoding="utf-8") as f:
                    self._presets[name] = f.read()
        logger.debug(f"已加载 {len(self._presets)} 个实验预设: {', '.join(self._presets)}")

    def reload(self):
        """重新扫描预设目录"""
        self._load_presets()

    def list_presets(self) -> List[str]:
        return sorted(self._presets)

    def get_preset(self, name: str) -> str:
        """
        获取指定预设的文本

        Args:
            name: 预设名称，如 'fig1', 'fig2', 'tiny'

        Returns:
            str: 预设文档

        Raises:
            ConfigError: 预设不存在
        """
        if name not in self._presets:
            raise ConfigError(f"未知预设 {name}，可用: {', '.join(self.list_presets())}", key="--config")
        return self._presets[name]
