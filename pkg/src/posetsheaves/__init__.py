"""Sheaves on finite posets: exact cohomology, duality and Cohen-Macaulay tests."""
