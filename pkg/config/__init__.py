"""Configuration module for fiberlab"""
from config.settings import *
