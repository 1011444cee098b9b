#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
核心模块初始化
内容动态、信道模型、仿真、FDM训练、下界与精确MDP求解
"""
