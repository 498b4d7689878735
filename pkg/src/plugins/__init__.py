"""
DistrictLab 功能模块
包含评分、实例、枚举、采样、随机游走、几何划分、优化、集成分析等模块
"""
