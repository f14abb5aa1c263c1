"""Init file for services package"""
