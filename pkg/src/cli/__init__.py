# 命令行模块
"""
命令行模块提供 simulate / train / bounds / solve-exact / sweep / summarize 子命令
"""
