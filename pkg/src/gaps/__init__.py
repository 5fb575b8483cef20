# Combinatorial gap, vertex expansion and certified expansion bounds
