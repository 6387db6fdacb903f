"""
Command-line interface: ``irrcnn train | eval | gradcheck | summary | compare``.
"""
