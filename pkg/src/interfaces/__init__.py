# Result and geometry types package