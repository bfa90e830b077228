"""Decision services: free products, presentations, decompositions, covers, witnesses and certificates."""
