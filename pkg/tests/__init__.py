"""Tests module initialization"""
