"""Scenarios, simulation, metrics and the benchmark suites"""
