# 策略模块
"""
策略模块包含各种缓存管理策略的实现（LISO、被动缓存、随机缓存、按生命周期阈值）
"""
