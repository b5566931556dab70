"""
mmfuse: gated and cross-attention multimodal fusion for POI type prediction
"""
__version__ = '1.0.0'
